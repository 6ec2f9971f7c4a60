#pragma once

#include <string>
#include <vector>

#include "frdiff/solver.hpp"

namespace frdiff::io {

std::string version();  // "frdiff <semver>"

// One grid point of an output table.
struct OutputRecord {
    double t = 0.0;
    std::vector<double> x;
    double value = 0.0;
    double error_estimate = 0.0;
};

struct Metadata {
    double alpha = 0.0;
    int n = 0;
    std::string operator_family;
    std::string version;
};

// Writes records to path in "json" (17 significant digits) or "csv"
// (12 significant digits, columns t, x1..xn, value, error_estimate).
// The write goes to a temporary file first and is renamed into place;
// identical inputs produce identical bytes.
void write_output(const std::vector<OutputRecord>& records, const Metadata& meta,
                  const std::string& path, const std::string& format);

// Re-reads a JSON output file; meta may be null.
std::vector<OutputRecord> read_output_json(const std::string& path,
                                           Metadata* meta = nullptr);

// Scalar coefficient description mirroring levi::CoefficientField.
struct CoefficientConfig {
    std::string family = "constant";  // constant | trig | bump
    std::vector<double> params;       // family-specific, see build()
    double holder_gamma = 1.0;

    levi::CoefficientField build() const;
};

// Elliptic operator description.
struct OperatorConfig {
    std::string type = "laplacian";  // laplacian | isotropic | diagonal
    std::vector<CoefficientConfig> coefficients;  // 1 / n entries
    double reaction = 0.0;  // constant zero-order coefficient

    levi::OperatorSpec build(int n) const;
};

// Initial datum or source from a small analytic family.
struct DataConfig {
    std::string family = "none";  // none | constant | cosine | gaussian
    double value = 1.0;
    double frequency = 1.0;  // cosine
    int axis = 0;            // cosine
    double width = 1.0;      // gaussian
};

struct GridConfig {
    int time_levels = 16;
    double time_grading = 2.0;
    double h = 0.25;
    double half_width = 2.0;
    double halo = 0.0;  // <= 0 means automatic
};

// Full problem description for the solve subcommand. alpha, T and n are
// required in the file; everything else has defaults.
struct Config {
    double alpha = 0.0;
    double T = 0.0;
    int n = 0;
    OperatorConfig op;
    DataConfig u0;
    DataConfig f;
    GridConfig grid;
    double tolerance = 1e-6;
    int max_iterations = 50;
    std::string output_path = "solution.json";
    std::string output_format = "json";

    void validate() const;
    solver::CauchyProblem problem() const;
    solver::GridRequest request() const;
};

// JSON load / save. Unknown keys and missing required fields raise
// DomainError naming the offending key; save(load(p)) is the identity on
// the parsed representation.
Config load_config(const std::string& path);
void save_config(const Config& config, const std::string& path);

}  // namespace frdiff::io
