// Config schema and output writers shared by the command-line front end.
#include "frdiff/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "frdiff/errors.hpp"
#include "json.hpp"

namespace frdiff::io {

using nlohmann::json;

std::string version() { return "frdiff 1.0.0"; }

namespace {

std::string num(double v, int digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp + " for writing");
        out << content;
        if (!out.flush()) throw Error("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("rename failed: " + path + ": " + ec.message());
}

// every object in the config file is checked against its key list, so typos
// fail loudly instead of silently using a default
void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw DomainError(where + ": expected an object");
    for (auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw DomainError(where + ": unknown key \"" + key + "\"");
    }
}

double require_number(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key))
        throw DomainError(where + ": missing required field \"" + key + "\"");
    if (!j[key].is_number())
        throw DomainError(where + ": field \"" + key + "\" must be a number");
    return j[key].get<double>();
}

json coeff_to_json(const CoefficientConfig& c) {
    return {{"family", c.family},
            {"params", c.params},
            {"holder_gamma", c.holder_gamma}};
}

CoefficientConfig coeff_from_json(const json& j, const std::string& where) {
    check_keys(j, where, {"family", "params", "holder_gamma"});
    CoefficientConfig c;
    c.family = j.value("family", "constant");
    c.params = j.value("params", std::vector<double>{});
    c.holder_gamma = j.value("holder_gamma", 1.0);
    return c;
}

json data_to_json(const DataConfig& d) {
    return {{"family", d.family}, {"value", d.value},   {"frequency", d.frequency},
            {"axis", d.axis},     {"width", d.width}};
}

DataConfig data_from_json(const json& j, const std::string& where) {
    check_keys(j, where, {"family", "value", "frequency", "axis", "width"});
    DataConfig d;
    d.family = j.value("family", "none");
    d.value = j.value("value", 1.0);
    d.frequency = j.value("frequency", 1.0);
    d.axis = j.value("axis", 0);
    d.width = j.value("width", 1.0);
    if (d.family != "none" && d.family != "constant" && d.family != "cosine" &&
        d.family != "gaussian")
        throw DomainError(where + ": unknown data family \"" + d.family + "\"");
    return d;
}

solver::SpatialFn spatial_fn(const DataConfig& d) {
    if (d.family == "none") return nullptr;
    if (d.family == "constant")
        return [v = d.value](const Eigen::VectorXd&) { return v; };
    if (d.family == "cosine")
        return [d](const Eigen::VectorXd& x) {
            return d.value * std::cos(d.frequency * x[d.axis]);
        };
    return [d](const Eigen::VectorXd& x) {
        return d.value * std::exp(-x.squaredNorm() / (d.width * d.width));
    };
}

}  // namespace

levi::CoefficientField CoefficientConfig::build() const {
    auto need = [&](size_t k) {
        if (params.size() != k)
            throw DomainError("coefficient family \"" + family + "\" takes " +
                              std::to_string(k) + " params, got " +
                              std::to_string(params.size()));
    };
    levi::CoefficientField f;
    if (family == "constant") {
        need(1);
        f = levi::CoefficientField::constant(params[0]);
    } else if (family == "trig") {
        need(3);
        f = levi::CoefficientField::trig(params[0], params[1], params[2]);
    } else if (family == "bump") {
        need(3);
        f = levi::CoefficientField::bump(params[0], params[1], params[2]);
    } else {
        throw DomainError("unknown coefficient family \"" + family + "\"");
    }
    f.holder_gamma = holder_gamma;
    return f;
}

levi::OperatorSpec OperatorConfig::build(int n) const {
    levi::OperatorSpec spec;
    if (type == "laplacian") {
        if (!coefficients.empty())
            throw DomainError("operator type \"laplacian\" takes no coefficients");
        spec = levi::OperatorSpec::laplacian(n);
    } else if (type == "isotropic") {
        if (coefficients.size() != 1)
            throw DomainError("operator type \"isotropic\" takes one coefficient");
        spec = levi::OperatorSpec::isotropic(n, coefficients[0].build());
    } else if (type == "diagonal") {
        if ((int)coefficients.size() != n)
            throw DomainError("operator type \"diagonal\" takes n coefficients");
        spec = levi::OperatorSpec::laplacian(n);
        double gmin = 1.0, dmin = 1e300;
        for (int d = 0; d < n; ++d) {
            auto cf = coefficients[d].build();
            spec.a[d][d] = cf;
            gmin = std::min(gmin, cf.holder_gamma);
            double lo = cf(Eigen::VectorXd::Zero(n));
            // crude ellipticity floor for the supported families: base minus
            // amplitude
            if (cf.family != levi::CoefficientField::Family::constant)
                lo = cf.params[0] - std::abs(cf.params[1]);
            dmin = std::min(dmin, lo);
        }
        spec.gamma = gmin;
        spec.delta = dmin;
    } else {
        throw DomainError("unknown operator type \"" + type + "\"");
    }
    if (reaction != 0.0) spec.c = levi::CoefficientField::constant(reaction);
    spec.validate();
    return spec;
}

void Config::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("alpha must lie in (0,1), got " + num(alpha, 6));
    if (!(T > 0.0)) throw DomainError("T must be positive");
    if (n < 1 || n > 3) throw DomainError("n must lie in 1..3");
    if (grid.time_levels < 2) throw DomainError("grid.time_levels must be >= 2");
    if (!(grid.h > 0.0)) throw DomainError("grid.h must be positive");
    if (!(grid.half_width > 0.0)) throw DomainError("grid.half_width must be positive");
    if (!(tolerance > 0.0)) throw DomainError("tolerance must be positive");
    if (output_format != "json" && output_format != "csv")
        throw DomainError("output_format must be \"json\" or \"csv\"");
    op.build(n);
}

solver::CauchyProblem Config::problem() const {
    solver::CauchyProblem p;
    p.alpha = alpha;
    p.T = T;
    p.op = op.build(n);
    p.u0 = spatial_fn(u0);
    p.u0_sup = p.u0 ? std::abs(u0.value) : 0.0;
    if (auto g = spatial_fn(f)) {
        p.f = [g](double, const Eigen::VectorXd& x) { return g(x); };
        p.f_sup = std::abs(f.value);
    }
    return p;
}

solver::GridRequest Config::request() const {
    solver::GridRequest r;
    r.time_levels = grid.time_levels;
    r.time_grading = grid.time_grading;
    r.h = grid.h;
    r.half_width = grid.half_width;
    r.halo = grid.halo;
    return r;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DomainError("config parse error in " + path + ": " + e.what());
    }
    check_keys(j, "config",
               {"alpha", "T", "n", "operator", "u0", "f", "grid", "tolerance",
                "max_iterations", "output_path", "output_format"});
    Config c;
    c.alpha = require_number(j, "config", "alpha");
    c.T = require_number(j, "config", "T");
    c.n = (int)require_number(j, "config", "n");
    if (j.contains("operator")) {
        const json& o = j["operator"];
        check_keys(o, "operator", {"type", "coefficients", "reaction"});
        c.op.type = o.value("type", "laplacian");
        c.op.reaction = o.value("reaction", 0.0);
        if (o.contains("coefficients")) {
            int k = 0;
            for (const json& cj : o["coefficients"])
                c.op.coefficients.push_back(
                    coeff_from_json(cj, "operator.coefficients[" + std::to_string(k++) + "]"));
        }
    }
    if (j.contains("u0")) c.u0 = data_from_json(j["u0"], "u0");
    if (j.contains("f")) c.f = data_from_json(j["f"], "f");
    if (j.contains("grid")) {
        const json& g = j["grid"];
        check_keys(g, "grid", {"time_levels", "time_grading", "h", "half_width", "halo"});
        c.grid.time_levels = g.value("time_levels", c.grid.time_levels);
        c.grid.time_grading = g.value("time_grading", c.grid.time_grading);
        c.grid.h = g.value("h", c.grid.h);
        c.grid.half_width = g.value("half_width", c.grid.half_width);
        c.grid.halo = g.value("halo", c.grid.halo);
    }
    c.tolerance = j.value("tolerance", c.tolerance);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.output_path = j.value("output_path", c.output_path);
    c.output_format = j.value("output_format", c.output_format);
    c.validate();
    return c;
}

void save_config(const Config& c, const std::string& path) {
    json o = {{"type", c.op.type}, {"reaction", c.op.reaction}};
    if (!c.op.coefficients.empty()) {
        json arr = json::array();
        for (auto& cf : c.op.coefficients) arr.push_back(coeff_to_json(cf));
        o["coefficients"] = arr;
    }
    json j = {{"alpha", c.alpha},
              {"T", c.T},
              {"n", c.n},
              {"operator", o},
              {"u0", data_to_json(c.u0)},
              {"f", data_to_json(c.f)},
              {"grid",
               {{"time_levels", c.grid.time_levels},
                {"time_grading", c.grid.time_grading},
                {"h", c.grid.h},
                {"half_width", c.grid.half_width},
                {"halo", c.grid.halo}}},
              {"tolerance", c.tolerance},
              {"max_iterations", c.max_iterations},
              {"output_path", c.output_path},
              {"output_format", c.output_format}};
    atomic_write(path, j.dump(2) + "\n");
}

void write_output(const std::vector<OutputRecord>& records, const Metadata& meta,
                  const std::string& path, const std::string& format) {
    std::ostringstream out;
    if (format == "csv") {
        out << "t";
        for (int d = 1; d <= meta.n; ++d) out << ",x" << d;
        out << ",value,error_estimate\n";
        for (const auto& r : records) {
            out << num(r.t, 12);
            for (double xd : r.x) out << "," << num(xd, 12);
            out << "," << num(r.value, 12) << "," << num(r.error_estimate, 12)
                << "\n";
        }
    } else if (format == "json") {
        // numbers are emitted by hand at 17 significant digits so the file
        // re-parses to bit-identical doubles
        out << "{\n  \"metadata\": {\"alpha\": " << num(meta.alpha, 17)
            << ", \"n\": " << meta.n << ", \"operator_family\": \""
            << meta.operator_family << "\", \"version\": \"" << meta.version
            << "\"},\n  \"records\": [";
        for (size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            out << (i ? ",\n    " : "\n    ") << "{\"t\": " << num(r.t, 17)
                << ", \"x\": [";
            for (size_t d = 0; d < r.x.size(); ++d)
                out << (d ? ", " : "") << num(r.x[d], 17);
            out << "], \"value\": " << num(r.value, 17)
                << ", \"error_estimate\": " << num(r.error_estimate, 17) << "}";
        }
        out << (records.empty() ? "]\n}\n" : "\n  ]\n}\n");
    } else {
        throw DomainError("unknown output format \"" + format + "\"");
    }
    atomic_write(path, out.str());
}

std::vector<OutputRecord> read_output_json(const std::string& path, Metadata* meta) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DomainError("parse error in " + path + ": " + e.what());
    }
    if (meta) {
        const json& m = j.at("metadata");
        meta->alpha = m.at("alpha").get<double>();
        meta->n = m.at("n").get<int>();
        meta->operator_family = m.at("operator_family").get<std::string>();
        meta->version = m.at("version").get<std::string>();
    }
    std::vector<OutputRecord> out;
    for (const json& rj : j.at("records")) {
        OutputRecord r;
        r.t = rj.at("t").get<double>();
        r.x = rj.at("x").get<std::vector<double>>();
        r.value = rj.at("value").get<double>();
        r.error_estimate = rj.at("error_estimate").get<double>();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace frdiff::io
