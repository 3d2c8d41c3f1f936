// Instance files, reports and the command surface of the kfusion tool.
#pragma once

#include "kfusion/kfusion.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kfusion::cli {

using Json = nlohmann::ordered_json;

struct SystemSpec {
    std::vector<std::vector<VecXd>> spanning;  // per member, as written in the file
    FusionSystem<double> system;
};

struct ProblemInstance {
    std::string name;
    Index ambient_dim = 0;
    MatXd k;
    std::map<std::string, SystemSpec> systems;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    Json params;   // command-specific extras
    Json source;   // the document as read, kept for byte-stable saving

    const FusionSystem<double>& system(const std::string& name) const;
    bool has(const std::string& name) const { return systems.count(name) > 0; }
};

// "3", "-0.25", "1/2", "-3/4"; numbers are accepted as is.
double parse_number(const Json& literal, const std::string& where);

ProblemInstance parse_instance(const Json& doc, const Tolerance& tol = {});
ProblemInstance load_instance(const std::string& path, const Tolerance& tol = {});
std::string dump_instance(const ProblemInstance& inst);
void save_instance(const ProblemInstance& inst, const std::string& path);

// FNV-1a over the canonical dump of the document.
std::uint64_t digest(const std::string& text);
std::string hex(std::uint64_t v);

struct Report {
    std::string command;
    std::string inputs_digest;
    Json results = Json::object();
    bool pass = false;

    Json to_json() const;
    std::string human() const;
};

struct Flags {
    std::string system = "W";
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    Index dim = 4;
    Index members = 3;
    Index rank = 2;
};

enum ExitCode { exit_pass = 0, exit_fail = 1, exit_input = 2, exit_numerical = 3 };

const std::vector<std::string>& commands();

// Dispatches one command; `instance` is ignored by `examples` and `random`.
Report run(const std::string& command, const ProblemInstance* instance, const Flags& flags);

ProblemInstance random_instance(std::uint64_t seed, Index ambient_dim, Index member_count, Index rank_k,
                                const Tolerance& tol = {});

// The bundled example instances, as documents.
Json example_r3();
Json example_r4();

struct GoldenCheck {
    std::string name;
    std::string expected;
    std::string actual;
    bool pass = false;
};

std::vector<GoldenCheck> golden_suite(const Tolerance& tol = {});

Json matrix_json(const MatXd& m);
Json system_json(const FusionSystem<double>& w);

} // namespace kfusion::cli
