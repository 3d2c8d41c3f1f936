#include "kfusion/cli.hpp"

#include <sstream>

namespace kfusion::cli {

const std::vector<std::string>& commands()
{
    static const std::vector<std::string> names = {"verify",        "bounds",       "douglas",  "qk-dual",
                                                   "k-dual",        "canonical-dual", "enlarge-dual", "resolution",
                                                   "minimal-norm",  "perturb",      "approx-dual", "examples",
                                                   "random"};
    return names;
}

Json Report::to_json() const
{
    Json j;
    j["command"] = command;
    j["inputs_digest"] = inputs_digest;
    j["results"] = results;
    j["pass"] = pass;
    return j;
}

namespace {

void flatten(const Json& j, const std::string& prefix, std::ostringstream& os)
{
    if (j.is_object()) {
        for (const auto& [key, val] : j.items())
            flatten(val, prefix.empty() ? key : prefix + "." + key, os);
        return;
    }
    // small numeric matrices print on one line
    os << prefix << ": " << j.dump() << "\n";
}

Json bounds_json(const FrameBounds& b)
{
    auto num = [](double x) { return std::isfinite(x) ? Json(x) : Json("inf"); };
    return {{"lower", num(b.lower)}, {"upper", num(b.upper)}, {"optimal", b.optimal}};
}

Json cert_json(const FrameCertificate<double>& c)
{
    Json j{{"k_fusion", c.pass}, {"bounds", bounds_json(c.bounds)}, {"routes_agree", c.routes_agree}};
    if (!c.pass)
        j["witness"] = matrix_json(c.witness.transpose());
    if (!c.notes.empty())
        j["notes"] = c.notes;
    return j;
}

Json dual_json(const DualCertificate<double>& c)
{
    Json j{{"residual", c.residual}, {"pass", c.pass}};
    if (c.dual_bounds) {
        j["dual_bounds"] = bounds_json(c.dual_bounds->bounds);
        j["lower_floor"] = c.c_floor;
        j["upper_floor"] = c.d_floor;
        j["bound_inequalities"] = c.c_ok && c.d_ok;
    }
    return j;
}

Tolerance tolerance_for(const ProblemInstance* inst, const Flags& flags)
{
    if (flags.tol)
        return Tolerance::from_scale(*flags.tol);
    if (inst && inst->tol)
        return Tolerance::from_scale(*inst->tol);
    return Tolerance{};
}

std::uint64_t seed_for(const ProblemInstance* inst, const Flags& flags)
{
    if (flags.seed)
        return *flags.seed;
    if (inst && inst->seed)
        return *inst->seed;
    return 0;
}

const FusionSystem<double>& secondary(const ProblemInstance& inst, const std::string& name)
{
    if (!inst.has(name))
        throw InputError("this command needs a system named \"" + name + "\" in the instance");
    return inst.system(name);
}

double param(const Json& obj, const char* key, double fallback)
{
    return obj.contains(key) ? parse_number(obj[key], std::string("params.") + key) : fallback;
}

Report run_on_instance(const std::string& cmd, const ProblemInstance& inst, const Flags& flags, const Tolerance& tol,
                       std::uint64_t seed)
{
    Report r;
    const auto& w = inst.system(flags.system);
    const MatXd& k = inst.k;
    Json& out = r.results;

    if (cmd == "verify" || cmd == "bounds") {
        const auto c = verify_k_fusion(w, k, tol);
        out = cert_json(c);
        if (cmd == "verify") {
            out["minimal"] = is_minimal(w, tol);
            if (c.pass) {
                const auto ex = is_exact(w, k, tol);
                out["exact"] = ex.exact;
                Json rem = Json::array();
                for (const auto& m : ex.removals)
                    rem.push_back({{"removed", m.index + 1}, {"still_k_fusion", m.still_k_fusion},
                                   {"bounds", bounds_json(m.bounds)}});
                out["removals"] = rem;
            }
        }
        r.pass = c.pass;
    } else if (cmd == "douglas") {
        const auto xw = x_w(w, k, tol);
        const auto& d = xw.douglas;
        out = {{"x", matrix_json(d.x)},          {"norm_sq", d.norm_sq},
               {"alpha_inf", d.alpha_inf},       {"nullspace_match", d.nullspace_match},
               {"range_containment", d.range_containment}, {"residual", d.residual}};
        Json comps = Json::array();
        for (std::size_t i = 0; i < w.size(); ++i)
            comps.push_back(matrix_json(xw.component(i)));
        out["components"] = comps;
        const bool agree = std::abs(d.norm_sq - d.alpha_inf) <= tol.eq_rel * std::max(1.0, d.norm_sq);
        out["norm_matches_alpha"] = agree;
        r.pass = agree && d.nullspace_match && d.range_containment;
    } else if (cmd == "qk-dual") {
        const auto xw = x_w(w, k, tol);
        const auto q = qk_dual_from_x(w, k, xw.matrix(), tol);
        out = {{"dual", system_json(q.system)}, {"q", matrix_json(q.q)}, {"certificate", dual_json(q.certificate)}};
        r.pass = q.certificate.pass && q.certificate.c_ok && q.certificate.d_ok;
    } else if (cmd == "k-dual") {
        const auto c = is_k_dual(w, secondary(inst, "V"), k, tol);
        out = {{"certificate", dual_json(c)}};
        r.pass = c.pass;
    } else if (cmd == "canonical-dual") {
        const auto c = canonical_k_dual(w, k, tol);
        out = {{"dual", system_json(c.system)},
               {"certificate", dual_json(c.certificate)},
               {"bessel_bound", c.bessel_bound},
               {"bessel_estimate", c.bessel_estimate},
               {"within_estimate", c.within_estimate}};
        r.pass = c.certificate.pass && c.within_estimate;
    } else if (cmd == "enlarge-dual") {
        if (!inst.params.contains("enlarge"))
            throw InputError("enlarge-dual: params.enlarge {member, span} is required");
        const Json& p = inst.params["enlarge"];
        const int member = int(param(p, "member", 0));
        if (member < 1 || std::size_t(member) > w.size())
            throw InputError("params.enlarge.member: must be between 1 and " + std::to_string(w.size()));
        std::vector<VecXd> vecs;
        for (const auto& v : p.value("span", Json::array())) {
            VecXd x(inst.ambient_dim);
            if (Index(v.size()) != inst.ambient_dim)
                throw InputError("params.enlarge.span: vector of the wrong length");
            for (Index i = 0; i < x.size(); ++i)
                x(i) = parse_number(v[std::size_t(i)], "params.enlarge.span");
            vecs.push_back(x);
        }
        const auto u = vecs.empty() ? Subspace<double>::zero(inst.ambient_dim) : Subspace<double>::from_spanning(vecs, tol);
        const auto canon = canonical_k_dual(w, k, tol);
        const auto e = enlarge_dual(w, k, canon.system, std::size_t(member - 1), u, tol);
        out = {{"dual", system_json(e.system)}, {"certificate", dual_json(e.certificate)}};
        r.pass = e.certificate.pass;
    } else if (cmd == "resolution") {
        const auto xw = x_w(w, k, tol);
        const std::vector<std::pair<std::string, Resolution<double>>> all = {
            {"from_x", resolution_from_x(xw)}, {"b", resolution_b(w, k, tol)}, {"c", resolution_c(w, k, tol)}};
        r.pass = true;
        for (const auto& [name, res] : all) {
            const auto v = verify_resolution(res, k, tol);
            const auto fr = frame_from_resolution(res, k, tol);
            out[name] = {{"residual", v.residual},
                         {"pass", v.pass},
                         {"upper", v.upper},
                         {"lower", std::isfinite(v.lower) ? Json(v.lower) : Json("inf")},
                         {"frame_from_ranges", cert_json(fr.certificate)}};
            r.pass = r.pass && v.pass && v.lower > 0 && fr.certificate.pass;
        }
    } else if (cmd == "minimal-norm") {
        const auto xw = x_w(w, k, tol);
        // X_w itself, then X_w moved along N(T_W): still a resolution into the W_i
        std::vector<MatXd> own, moved;
        const MatXd t = synthesis(w);
        Rng rng(seed);
        const MatXd xalt = xw.matrix() + (MatXd::Identity(t.cols(), t.cols()) - pinv(t, tol) * t) *
                                             gaussian(t.cols(), k.cols(), rng);
        for (std::size_t i = 0; i < w.size(); ++i) {
            own.push_back(xw.component(i));
            moved.push_back(w.subspace(i).basis() * xalt.middleRows(w.offset(i), w.subspace(i).dim()));
        }
        r.pass = true;
        for (const auto& [name, th] : {std::pair{"x_w", own}, std::pair{"perturbed", moved}}) {
            const auto m = minimal_norm_check(w, k, th, tol, 100, seed);
            out[name] = {{"hypothesis_ok", m.hypothesis_ok},
                         {"min_margin_plain", m.min_margin_plain},
                         {"max_margin_plain", m.max_margin_plain},
                         {"min_margin_shifted", m.min_margin_shifted},
                         {"max_margin_shifted", m.max_margin_shifted},
                         {"pass", m.pass}};
            r.pass = r.pass && m.pass && m.hypothesis_ok;
        }
        Rng frng(seed + 1);
        const VecXd f = k * gaussian(k.cols(), 1, frng);
        const auto p = pinv_via_xw(w, k, f, tol);
        out["pinv"] = {{"residual", p.residual}, {"weighted_residual", p.weighted_residual}, {"pass", p.pass}};
        r.pass = r.pass && p.pass;
    } else if (cmd == "perturb") {
        const auto& z = secondary(inst, "Z");
        const double eps = analysis_epsilon(w, z, k, tol);
        const auto wc = verify_k_fusion(w, k, tol);
        out["analysis_epsilon"] = std::isfinite(eps) ? Json(eps) : Json("inf");
        out["sqrt_a"] = std::sqrt(wc.bounds.lower);
        r.pass = wc.pass && std::isfinite(eps) && eps < std::sqrt(wc.bounds.lower);
        if (r.pass) {
            const auto pb = perturbed_bounds(w, z, k, eps, tol);
            out["predicted"] = bounds_json(pb.predicted);
            out["actual"] = bounds_json(pb.actual);
            out["dominates"] = pb.dominates;
            r.pass = pb.dominates;
            if (pb.actual_is_k_fusion) {
                const auto th = epsilon_threshold(w, z, k, tol);
                out["threshold"] = {{"deviation", th.deviation}, {"z_norm", th.z_norm}, {"k_norm", th.k_norm},
                                    {"numerator", th.numerator}, {"value", th.threshold}, {"vacuous", th.vacuous}};
            }
        }
        if (inst.params.contains("perturb")) {
            const Json& p = inst.params["perturb"];
            const auto c = certify_perturbation(w, z, k, param(p, "lambda1", 0.5), param(p, "lambda2", 0.5),
                                                param(p, "epsilon", 0.5), tol, seed);
            static const char* how[] = {"certificate", "falsified", "undecided"};
            out["lambda_perturbation"] = {{"decided_by", how[int(c.decided_by)]},
                                          {"hypothesis_holds", c.hypothesis_holds},
                                          {"epsilon_threshold", c.epsilon_threshold},
                                          {"below_threshold", c.below_threshold},
                                          {"predicted", bounds_json(c.predicted)},
                                          {"actual", bounds_json(c.actual)},
                                          {"sandwich", c.sandwich},
                                          {"certified", c.certified}};
            if (c.falsified_witness)
                out["lambda_perturbation"]["witness"] = matrix_json(c.falsified_witness->transpose());
        }
    } else if (cmd == "approx-dual") {
        const auto& z = secondary(inst, "Z");
        const FusionSystem<double> v = inst.has("V") ? inst.system("V") : canonical_k_dual(w, k, tol).system;
        out["v_is_k_dual_of_w"] = is_k_dual(w, v, k, tol).pass;
        const auto a = approximate_dual_norm(z, v, k, tol);
        out["norm"] = a.norm;
        r.pass = a.pass;
    } else {
        throw InputError("unknown command \"" + cmd + "\"");
    }
    return r;
}

} // namespace

Report run(const std::string& cmd, const ProblemInstance* inst, const Flags& flags)
{
    const Tolerance tol = tolerance_for(inst, flags);
    const std::uint64_t seed = seed_for(inst, flags);
    Report r;
    if (cmd == "examples") {
        const auto checks = golden_suite(tol);
        r.pass = true;
        Json list = Json::array();
        for (const auto& c : checks) {
            list.push_back({{"name", c.name}, {"expected", c.expected}, {"actual", c.actual}, {"pass", c.pass}});
            r.pass = r.pass && c.pass;
        }
        r.results["checks"] = list;
    } else if (cmd == "random") {
        const auto made = random_instance(seed, flags.dim, flags.members, flags.rank, tol);
        const auto c = verify_k_fusion(made.system("W"), made.k, tol);
        r.results["instance"] = made.source;
        r.results["verify"] = cert_json(c);
        r.pass = c.pass;
        r.inputs_digest = hex(digest(made.source.dump()));
    } else {
        if (!inst)
            throw InputError(cmd + ": --in is required");
        r = run_on_instance(cmd, *inst, flags, tol, seed);
    }
    r.command = cmd;
    if (r.inputs_digest.empty()) {
        std::ostringstream key;
        key << (inst ? inst->source.dump() : std::string()) << "|" << cmd << "|" << flags.system << "|" << seed << "|"
            << tol.rank_rel << "," << tol.eq_abs << "," << tol.eq_rel;
        r.inputs_digest = hex(digest(key.str()));
    }
    return r;
}

std::string Report::human() const
{
    std::ostringstream os;
    os << "command: " << command << "\n";
    os << "inputs_digest: " << inputs_digest << "\n";
    if (command == "examples" && results.contains("checks")) {
        for (const auto& c : results["checks"])
            os << (c["pass"].get<bool>() ? "[ok]   " : "[FAIL] ") << c["name"].get<std::string>()
               << ": expected " << c["expected"].get<std::string>() << ", got " << c["actual"].get<std::string>()
               << "\n";
    } else {
        flatten(results, "", os);
    }
    os << "pass: " << (pass ? "true" : "false") << "\n";
    return os.str();
}

} // namespace kfusion::cli
