#include "kfusion/cli.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace kfusion::cli {

namespace {

double parse_decimal(const std::string& s, const std::string& where)
{
    if (s.empty())
        throw InputError(where + ": empty number");
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size() || errno == ERANGE || !std::isfinite(v))
        throw InputError(where + ": cannot read number \"" + s + "\"");
    return v;
}

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

const Json& require(const Json& obj, const char* key, const std::string& where)
{
    if (!obj.is_object() || !obj.contains(key))
        throw InputError(where + ": missing field \"" + key + "\"");
    return obj.at(key);
}

} // namespace

double parse_number(const Json& literal, const std::string& where)
{
    if (literal.is_number())
        return literal.get<double>();
    if (!literal.is_string())
        throw InputError(where + ": expected a number or a string like \"1/2\"");
    const std::string s = trim(literal.get<std::string>());
    const auto slash = s.find('/');
    if (slash == std::string::npos)
        return parse_decimal(s, where);
    const double num = parse_decimal(trim(s.substr(0, slash)), where);
    const double den = parse_decimal(trim(s.substr(slash + 1)), where);
    if (den == 0)
        throw InputError(where + ": zero denominator");
    return num / den;
}

const FusionSystem<double>& ProblemInstance::system(const std::string& n) const
{
    const auto it = systems.find(n);
    if (it == systems.end())
        throw InputError("instance has no system named \"" + n + "\"");
    return it->second.system;
}

ProblemInstance parse_instance(const Json& doc, const Tolerance& tol)
{
    if (!doc.is_object())
        throw InputError("instance: top level must be an object");
    ProblemInstance inst;
    inst.source = doc;
    inst.name = doc.value("name", std::string("unnamed"));

    const Json& dim = require(doc, "ambient_dim", "instance");
    if (!dim.is_number_integer() || dim.get<long long>() < 1)
        throw InputError("ambient_dim: must be a positive integer");
    inst.ambient_dim = dim.get<Index>();
    const Index n = inst.ambient_dim;

    const Json& kj = require(doc, "K", "instance");
    const Json& rows = require(kj, "rows", "K");
    const Json& cols = require(kj, "cols", "K");
    const Json& entries = require(kj, "entries", "K");
    if (!rows.is_number_integer() || !cols.is_number_integer())
        throw InputError("K.rows/K.cols: must be integers");
    if (rows.get<Index>() != n || cols.get<Index>() != n)
        throw InputError("K: must be " + std::to_string(n) + " x " + std::to_string(n) + " to act on the ambient space");
    if (!entries.is_array() || Index(entries.size()) != n * n)
        throw InputError("K.entries: expected " + std::to_string(n * n) + " row-major entries");
    inst.k.resize(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            inst.k(i, j) = parse_number(entries[std::size_t(i * n + j)],
                                        "K.entries[" + std::to_string(i * n + j) + "]");

    const Json& systems = require(doc, "systems", "instance");
    if (!systems.is_object())
        throw InputError("systems: must be an object of named systems");
    for (const auto& [sname, members] : systems.items()) {
        const std::string where = "systems." + sname;
        if (!members.is_array() || members.empty())
            throw InputError(where + ": must be a nonempty list of members");
        SystemSpec spec;
        spec.system = FusionSystem<double>(n);
        for (std::size_t m = 0; m < members.size(); ++m) {
            const std::string mw = where + "[" + std::to_string(m) + "]";
            const Json& span = require(members[m], "span", mw);
            if (!span.is_array())
                throw InputError(mw + ".span: must be a list of vectors");
            std::vector<VecXd> vecs;
            for (std::size_t v = 0; v < span.size(); ++v) {
                const std::string vw = mw + ".span[" + std::to_string(v) + "]";
                if (!span[v].is_array() || Index(span[v].size()) != n)
                    throw InputError(vw + ": expected " + std::to_string(n) + " entries");
                VecXd x(n);
                for (Index i = 0; i < n; ++i)
                    x(i) = parse_number(span[v][std::size_t(i)], vw);
                vecs.push_back(x);
            }
            const double weight = members[m].contains("weight") ? parse_number(members[m]["weight"], mw + ".weight") : 1.0;
            if (!(weight > 0))
                throw InputError(mw + ".weight: must be positive (member " + std::to_string(m + 1) + " of " + sname + ")");
            Subspace<double> sub = vecs.empty() ? Subspace<double>::zero(n) : Subspace<double>::span(
                [&] {
                    MatXd mat(n, Index(vecs.size()));
                    for (Index j = 0; j < mat.cols(); ++j)
                        mat.col(j) = vecs[std::size_t(j)];
                    return mat;
                }(),
                tol);
            spec.system.add(std::move(sub), weight);
            spec.spanning.push_back(std::move(vecs));
        }
        inst.systems.emplace(sname, std::move(spec));
    }
    if (!inst.has("W"))
        throw InputError("systems: an instance needs a system named \"W\"");

    if (doc.contains("options")) {
        const Json& o = doc["options"];
        if (o.contains("tol"))
            inst.tol = parse_number(o["tol"], "options.tol");
        if (o.contains("seed")) {
            if (!o["seed"].is_number_unsigned())
                throw InputError("options.seed: must be a nonnegative integer");
            inst.seed = o["seed"].get<std::uint64_t>();
        }
    }
    inst.params = doc.value("params", Json::object());
    return inst;
}

ProblemInstance load_instance(const std::string& path, const Tolerance& tol)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open \"" + path + "\"");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
    return parse_instance(doc, tol);
}

std::string dump_instance(const ProblemInstance& inst)
{
    return inst.source.dump(2) + "\n";
}

void save_instance(const ProblemInstance& inst, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write \"" + path + "\"");
    out << dump_instance(inst);
}

std::uint64_t digest(const std::string& text)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

Json matrix_json(const MatXd& m)
{
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json r = Json::array();
        for (Index j = 0; j < m.cols(); ++j)
            r.push_back(std::abs(m(i, j)) < 1e-15 ? 0.0 : m(i, j));
        rows.push_back(r);
    }
    return rows;
}

Json system_json(const FusionSystem<double>& w)
{
    Json out = Json::array();
    for (const auto& m : w.members())
        out.push_back({{"dim", m.subspace.dim()}, {"weight", m.weight}, {"projector", matrix_json(m.subspace.projector())}});
    return out;
}

namespace {

Json literal_vector(std::initializer_list<const char*> xs)
{
    Json v = Json::array();
    for (const char* x : xs)
        v.push_back(x);
    return v;
}

} // namespace

Json example_r3()
{
    Json doc;
    doc["name"] = "example_r3";
    doc["comment"] = "R^3 with K e1 = e1 + e2, K e2 = e3, K e3 = 0 and three unit-weight subspaces";
    doc["ambient_dim"] = 3;
    doc["K"] = {{"rows", 3}, {"cols", 3}, {"entries", literal_vector({"1", "0", "0", "1", "0", "0", "0", "1", "0"})}};
    Json w = Json::array();
    w.push_back({{"span", Json::array({literal_vector({"1", "1", "0"}), literal_vector({"0", "0", "1"})})}, {"weight", "1"}});
    w.push_back({{"span", Json::array({literal_vector({"0", "0", "1"})})}, {"weight", "1"}});
    w.push_back({{"span", Json::array({literal_vector({"1", "1", "0"})})}, {"weight", "1"}});
    Json v = Json::array();
    v.push_back({{"span", Json::array({literal_vector({"1", "0", "0"}), literal_vector({"0", "1", "0"})})}, {"weight", "1"}});
    v.push_back({{"span", Json::array({literal_vector({"0", "1", "0"})})}, {"weight", "1"}});
    v.push_back({{"span", Json::array({literal_vector({"1", "0", "0"}), literal_vector({"0", "0", "1"})})}, {"weight", "1"}});
    Json z = Json::array();
    z.push_back({{"span", Json::array({literal_vector({"1", "1", "0"}), literal_vector({"0", "0", "1"})})}, {"weight", "1"}});
    z.push_back({{"span", Json::array({literal_vector({"0", "0", "1"}), literal_vector({"1", "1", "0"})})}, {"weight", "1"}});
    z.push_back({{"span", Json::array({literal_vector({"1", "1", "0"})})}, {"weight", "1"}});
    doc["systems"] = {{"W", w}, {"V", v}, {"Z", z}};
    doc["params"] = {{"enlarge", {{"member", 3}, {"span", Json::array({literal_vector({"0", "0", "1"})})}}},
                     {"perturb", {{"lambda1", "1/2"}, {"lambda2", "1/2"}, {"epsilon", "1/2"}}}};
    return doc;
}

Json example_r4()
{
    Json doc;
    doc["name"] = "example_r4";
    doc["comment"] = "R^4 with K e1 = e1, K e2 = e1, K e3 = e2; K e4 is not given and is taken as 0";
    doc["ambient_dim"] = 4;
    doc["K"] = {{"rows", 4},
                {"cols", 4},
                {"entries", literal_vector({"1", "1", "0", "0", "0", "0", "1", "0", "0", "0", "0", "0", "0", "0", "0", "0"})}};
    Json w = Json::array();
    w.push_back({{"span", Json::array({literal_vector({"1", "0", "0", "0"}), literal_vector({"0", "1", "0", "0"})})},
                 {"weight", "1"}});
    w.push_back({{"span", Json::array({literal_vector({"0", "0", "1", "0"})})}, {"weight", "1"}});
    doc["systems"] = {{"W", w}};
    return doc;
}

} // namespace kfusion::cli
