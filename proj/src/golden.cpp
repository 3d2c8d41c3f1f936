#include "kfusion/cli.hpp"

#include <sstream>

namespace kfusion::cli {

namespace {

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

struct Suite {
    std::vector<GoldenCheck> checks;

    void value(const std::string& name, double expected, double actual, double tol)
    {
        checks.push_back({name, fmt(expected), fmt(actual), std::abs(expected - actual) <= tol});
    }
    void below(const std::string& name, double bound, double actual)
    {
        checks.push_back({name, "< " + fmt(bound), fmt(actual), actual < bound});
    }
    void flag(const std::string& name, bool expected, bool actual)
    {
        checks.push_back({name, expected ? "true" : "false", actual ? "true" : "false", expected == actual});
    }
    void matrix(const std::string& name, const MatXd& expected, const MatXd& actual, double tol)
    {
        const double gap = expected.rows() == actual.rows() && expected.cols() == actual.cols()
                               ? (expected - actual).cwiseAbs().maxCoeff()
                               : std::numeric_limits<double>::infinity();
        checks.push_back({name, "max entry gap <= " + fmt(tol), fmt(gap), gap <= tol});
    }
    void subspaces(const std::string& name, const std::vector<Subspace<double>>& expected, const FusionSystem<double>& got,
                   const Tolerance& tol)
    {
        bool ok = expected.size() == got.size();
        std::string dims;
        for (std::size_t i = 0; ok && i < got.size(); ++i)
            ok = got.subspace(i).equals(expected[i], tol);
        for (std::size_t i = 0; i < got.size(); ++i)
            dims += (i ? "," : "") + std::to_string(got.subspace(i).dim());
        checks.push_back({name, "equal families", "dims (" + dims + ")" + (ok ? " equal" : " differ"), ok});
    }
};

VecXd e(Index n, Index i)
{
    VecXd v = VecXd::Zero(n);
    v(i) = 1;
    return v;
}

Subspace<double> span_of(std::initializer_list<VecXd> vs)
{
    return Subspace<double>::from_spanning(std::vector<VecXd>(vs));
}

} // namespace

std::vector<GoldenCheck> golden_suite(const Tolerance& tol)
{
    Suite s;

    // R^4: minimal, not exact, bounds (1/2, 1)
    {
        const auto inst = parse_instance(example_r4(), tol);
        const auto& w = inst.system("W");
        const auto c = verify_k_fusion(w, inst.k, tol);
        s.value("r4 lower bound", 0.5, c.bounds.lower, 1e-8);
        s.value("r4 upper bound", 1.0, c.bounds.upper, 1e-8);
        s.flag("r4 minimal", true, is_minimal(w, tol));
        const auto ex = is_exact(w, inst.k, tol);
        s.flag("r4 exact", false, ex.exact);
        s.flag("r4 {W1} still a K-fusion frame", true, ex.removals[1].still_k_fusion);
        s.value("r4 {W1} lower bound", 0.5, ex.removals[1].bounds.lower, 1e-8);
        s.value("r4 {W1} upper bound", 1.0, ex.removals[1].bounds.upper, 1e-8);
    }

    const auto inst = parse_instance(example_r3(), tol);
    const auto& w = inst.system("W");
    const MatXd& k = inst.k;
    const Index n = 3;
    const VecXd e1 = e(n, 0), e2 = e(n, 1), e3 = e(n, 2);

    {
        s.value("r3 rank of K", 2, double(numerical_rank(k, tol)), 0);
        const auto c = verify_k_fusion(w, k, tol);
        s.value("r3 lower bound", 1.0, c.bounds.lower, 1e-8);
        s.value("r3 upper bound", 2.0, c.bounds.upper, 1e-8);

        Rng rng(7);
        double worst_k = 0, worst_t = 0;
        const MatXd ta = analysis(w);
        for (int t = 0; t < 100; ++t) {
            const VecXd f = gaussian(3, 1, rng);
            const double a = f(0), b = f(1), cc = f(2);
            const double ek = (a + b) * (a + b) + cc * cc, et = (a + b) * (a + b) + 2 * cc * cc;
            worst_k = std::max(worst_k, std::abs((k.transpose() * f).squaredNorm() - ek) / std::max(1.0, ek));
            worst_t = std::max(worst_t, std::abs((ta * f).squaredNorm() - et) / std::max(1.0, et));
        }
        s.value("r3 ||K^* f||^2 = (a+b)^2 + c^2", 0, worst_k, 1e-8);
        s.value("r3 ||T_W^* f||^2 = (a+b)^2 + 2c^2", 0, worst_t, 1e-8);
    }
    const auto xw = x_w(w, k, tol);
    {
        s.value("r3 ||X||^2", 1.0, xw.douglas.norm_sq, 1e-8);
        s.flag("r3 N(X) = N(K)", true, xw.douglas.nullspace_match);
        s.flag("r3 R(X) inside R(T_W^*)", true, xw.douglas.range_containment);
        const MatXd x1 = xw.component(0), x2 = xw.component(1), x3 = xw.component(2);
        MatXd e1m(3, 3), e2m(3, 3), e3m(3, 3);
        e1m << 0.5, 0, 0, 0.5, 0, 0, 0, 0.5, 0;
        e2m << 0, 0, 0, 0, 0, 0, 0, 0.5, 0;
        e3m << 0.5, 0, 0, 0.5, 0, 0, 0, 0, 0;
        s.matrix("r3 X_1", e1m, x1, 1e-10);
        s.matrix("r3 X_2", e2m, x2, 1e-10);
        s.matrix("r3 X_3", e3m, x3, 1e-10);
    }
    {
        MatXd sw(3, 3), swi(3, 3);
        sw << 1, 1, 0, 1, 1, 0, 0, 0, 2;
        swi << 0.25, 0.25, 0, 0.25, 0.25, 0, 0, 0, 0.5;
        const MatXd pr = projector(LinearMap<double>(k, tol).range());
        s.matrix("r3 S_W", sw, frame_operator(w), 1e-10);
        s.matrix("r3 S_W pi_R(K)", sw, frame_operator(w) * pr, 1e-10);
        s.matrix("r3 pinv(S_W pi_R(K))", swi, sinv_on_range(w, k, tol), 1e-10);
    }
    const std::vector<Subspace<double>> hat = {span_of({e1, e2}), span_of({e2}), span_of({e1})};
    {
        const auto canon = canonical_k_dual(w, k, tol);
        s.subspaces("r3 canonical K-dual", hat, canon.system, tol);
        s.flag("r3 canonical K-dual reconstructs K", true, canon.certificate.pass);

        const auto sinv = transform_sinv(w, k, tol);
        s.subspaces("r3 S_W^{-1} pi W_i = W_i", {w.subspace(0), w.subspace(1), w.subspace(2)}, sinv.system, tol);

        const auto enl = enlarge_dual(w, k, canon.system, 2, span_of({e3}), tol);
        s.subspaces("r3 enlarged dual", {hat[0], hat[1], span_of({e1, e3})}, enl.system, tol);
        s.value("r3 enlarged dual residual", 0, enl.certificate.residual, 1e-9);
        s.flag("r3 given V is a K-dual", true, is_k_dual(w, inst.system("V"), k, tol).pass);

        const auto qk = qk_dual_from_x(w, k, xw.matrix(), tol);
        s.subspaces("r3 X_i^* W_i", hat, qk.system, tol);
        s.flag("r3 QK-dual certificate", true, qk.certificate.pass);

        const auto sws = check_sws_range_condition(w, k, tol);
        s.flag("r3 S_W(S_W(R(K))) inside R(K)", true, sws.condition);
        s.flag("r3 canonical K-dual = X_i^* W_i", true, sws.family_equal);
    }
    {
        // F = {(1, 0)} against the projection onto the diagonal of R^2
        KFrame<double> f{MatXd(VecXd::Unit(2, 0))};
        MatXd p(2, 2);
        p << 0.5, 0.5, 0.5, 0.5;
        s.flag("R^2 {(1,0)} is a K-frame", false, verify_k_frame(f, p, tol).pass);
    }
    {
        const auto& z = inst.system("Z");
        MatXd sz(3, 3), szi(3, 3);
        sz << 1.5, 1.5, 0, 1.5, 1.5, 0, 0, 0, 2;
        szi << 1.0 / 6, 1.0 / 6, 0, 1.0 / 6, 1.0 / 6, 0, 0, 0, 0.5;
        const MatXd pr = projector(LinearMap<double>(k, tol).range());
        s.matrix("perturbed S_Z pi_R(K)", sz, frame_operator(z) * pr, 1e-10);
        s.matrix("perturbed pinv(S_Z pi_R(K))", szi, sinv_on_range(z, k, tol), 1e-10);
        s.below("perturbed analysis epsilon", 0.5, analysis_epsilon(w, z, k, tol));
        const auto th = epsilon_threshold(w, z, k, tol);
        s.value("perturbed ||K^*(S_Z^-1 - S_W^-1)||", 1.0 / 6, th.deviation, 1e-9);
        s.value("perturbed ||(S_Z^-1)^* K||", 1.0 / 3, th.z_norm, 1e-9);
        s.value("perturbed epsilon threshold", 1.0, th.threshold, 1e-9);
        s.flag("perturbed Z is a K-fusion frame", true, verify_k_fusion(z, k, tol).pass);
        const auto canon = canonical_k_dual(w, k, tol);
        s.below("perturbed approximate dual norm", 0.25, approximate_dual_norm(z, canon.system, k, tol).norm);
    }
    return s.checks;
}

} // namespace kfusion::cli
