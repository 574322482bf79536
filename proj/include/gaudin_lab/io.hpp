#ifndef GAUDIN_LAB_IO_HPP
#define GAUDIN_LAB_IO_HPP

// JSON run configurations and reports, CSV trajectories.
//
// Complex numbers are [re, im]; matrices are row-major nested arrays of
// complex numbers. Every number is written with round-trip precision so that
// identical inputs give byte-identical files.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaudin_lab/errors.hpp"
#include "gaudin_lab/gaudin_models.hpp"
#include "gaudin_lab/phase_flows.hpp"

namespace gaudin_lab::io
{

using json = nlohmann::ordered_json;

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---- JSON <-> numeric types -------------------------------------------------

inline json to_json(cplx z)
{
    return json::array({z.real(), z.imag()});
}

inline json to_json(const CMatrix &x)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            row.push_back(to_json(x(r, c)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json to_json(const CVector &v)
{
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        out.push_back(to_json(v(k)));
    }
    return out;
}

[[noreturn]] inline void schema_error(const std::string &where, const std::string &what)
{
    fail(ErrorKind::config, where + ": " + what);
}

inline const json &require(const json &j, const std::string &key, const std::string &where)
{
    if (!j.is_object() || !j.contains(key)) {
        schema_error(where, "missing key '" + key + "'");
    }
    return j.at(key);
}

inline double read_double(const json &j, const std::string &where)
{
    if (!j.is_number()) {
        schema_error(where, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        schema_error(where, "number is not finite");
    }
    return v;
}

inline int read_int(const json &j, const std::string &where)
{
    if (!j.is_number_integer()) {
        schema_error(where, "expected an integer");
    }
    return j.get<int>();
}

inline cplx read_complex(const json &j, const std::string &where)
{
    if (j.is_number()) {
        return read_double(j, where);
    }
    if (!j.is_array() || j.size() != 2) {
        schema_error(where, "expected a complex number [re, im]");
    }
    return {read_double(j[0], where + "[0]"), read_double(j[1], where + "[1]")};
}

inline CVector read_complex_vector(const json &j, const std::string &where)
{
    if (!j.is_array()) {
        schema_error(where, "expected an array of complex numbers");
    }
    CVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) {
        v(static_cast<Eigen::Index>(k)) = read_complex(j[k], where + "[" + std::to_string(k) + "]");
    }
    return v;
}

inline CMatrix read_matrix(const json &j, int m, const std::string &where)
{
    if (!j.is_array() || static_cast<int>(j.size()) != m) {
        schema_error(where, "expected " + std::to_string(m) + " rows");
    }
    CMatrix x(m, m);
    for (int r = 0; r < m; ++r) {
        const auto &row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != m) {
            schema_error(where, "row " + std::to_string(r) + " must have " + std::to_string(m) + " entries");
        }
        for (int c = 0; c < m; ++c) {
            x(r, c) = read_complex(row[static_cast<std::size_t>(c)], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
        }
    }
    return x;
}

// ---- run configuration ------------------------------------------------------

struct RandomStateSpec {
    std::uint64_t seed = 0;
    double scale = 1.0;
    double margin = 0.05;
};

struct ExplicitStateSpec {
    std::vector<CMatrix> residues;
    CVector q;
    CVector p;
};

struct OutputPaths {
    std::string trajectory_csv;
    std::string diagnostics_json;
};

struct RunConfig {
    ModelSpec model;
    std::optional<RandomStateSpec> random_state;
    std::optional<ExplicitStateSpec> explicit_state;
    FlowCurve curve;
    double h = 1e-3;
    StepMethod method = StepMethod::rk4;
    double pole_guard = default_pole_guard;
    std::vector<cplx> z_samples;
    OutputPaths outputs;
    std::vector<std::string> checks;
    std::string residue_sum_mode = "monitor";

    // Seed recorded in outputs; explicit states report 0.
    std::uint64_t seed() const
    {
        return random_state ? random_state->seed : 0;
    }
};

inline ModelSpec parse_model(const json &j)
{
    const std::string w = "model";
    ModelSpec s;
    s.genus = read_int(require(j, "genus", w), w + ".genus");
    if (s.genus != 0 && s.genus != 1) {
        schema_error(w + ".genus", "must be 0 or 1");
    }
    s.m = read_int(require(j, "m", w), w + ".m");
    if (s.m < 2) {
        schema_error(w + ".m", "must be at least 2");
    }
    if (s.genus == 1) {
        s.tau = read_complex(require(j, "tau", w), w + ".tau");
    } else if (j.contains("tau")) {
        s.tau = read_complex(j.at("tau"), w + ".tau");
    }
    const CVector pts = read_complex_vector(require(j, "marked_points", w), w + ".marked_points");
    s.marked_points.assign(pts.data(), pts.data() + pts.size());
    const auto &hams = require(j, "hamiltonians", w);
    if (!hams.is_array()) {
        schema_error(w + ".hamiltonians", "expected an array");
    }
    for (std::size_t k = 0; k < hams.size(); ++k) {
        const std::string wk = w + ".hamiltonians[" + std::to_string(k) + "]";
        HamiltonianSpec h;
        h.point = read_complex(require(hams[k], "point", wk), wk + ".point");
        if (hams[k].contains("degree")) {
            h.degree = read_int(hams[k].at("degree"), wk + ".degree");
        }
        s.hamiltonians.push_back(h);
    }
    return s;
}

inline RunConfig parse_run_config(const json &j)
{
    if (!j.is_object()) {
        schema_error("config", "top level must be an object");
    }
    static const std::vector<std::string> known = {"model", "initial_state", "curve", "step", "z_samples", "outputs", "checks", "residue_sum_mode"};
    for (const auto &item : j.items()) {
        if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
            schema_error("config", "unknown key '" + item.key() + "'");
        }
    }
    RunConfig c;
    c.model = parse_model(require(j, "model", "config"));

    const auto &st = require(j, "initial_state", "config");
    if (st.is_string()) {
        if (st.get<std::string>() != "random") {
            schema_error("initial_state", "string form must be \"random\"");
        }
        c.random_state = RandomStateSpec{};
    } else if (st.is_object() && st.contains("random")) {
        const auto &r = st.at("random");
        RandomStateSpec rs;
        if (r.contains("seed")) {
            if (!r.at("seed").is_number_unsigned()) {
                schema_error("initial_state.random.seed", "expected a non-negative integer");
            }
            rs.seed = r.at("seed").get<std::uint64_t>();
        }
        if (r.contains("scale")) {
            rs.scale = read_double(r.at("scale"), "initial_state.random.scale");
        }
        if (r.contains("margin")) {
            rs.margin = read_double(r.at("margin"), "initial_state.random.margin");
        }
        c.random_state = rs;
    } else if (st.is_object()) {
        ExplicitStateSpec es;
        const auto &res = require(st, "residues", "initial_state");
        if (!res.is_array()) {
            schema_error("initial_state.residues", "expected an array of matrices");
        }
        for (std::size_t k = 0; k < res.size(); ++k) {
            es.residues.push_back(read_matrix(res[k], c.model.m, "initial_state.residues[" + std::to_string(k) + "]"));
        }
        if (c.model.genus == 1) {
            es.q = read_complex_vector(require(st, "q", "initial_state"), "initial_state.q");
            es.p = read_complex_vector(require(st, "p", "initial_state"), "initial_state.p");
        }
        c.explicit_state = std::move(es);
    } else {
        schema_error("initial_state", "expected \"random\" or an object");
    }

    const auto &curve = require(j, "curve", "config");
    if (!curve.is_array()) {
        schema_error("curve", "expected an array of waypoints");
    }
    for (std::size_t k = 0; k < curve.size(); ++k) {
        const auto &wp = curve[k];
        if (!wp.is_array()) {
            schema_error("curve[" + std::to_string(k) + "]", "expected an array of times");
        }
        RVector t(static_cast<Eigen::Index>(wp.size()));
        for (std::size_t i = 0; i < wp.size(); ++i) {
            t(static_cast<Eigen::Index>(i)) = read_double(wp[i], "curve[" + std::to_string(k) + "][" + std::to_string(i) + "]");
        }
        c.curve.waypoints.push_back(std::move(t));
    }

    const auto &step = require(j, "step", "config");
    if (step.is_number()) {
        c.h = read_double(step, "step");
    } else {
        c.h = read_double(require(step, "h", "step"), "step.h");
        if (step.contains("method")) {
            if (!step.at("method").is_string()) {
                schema_error("step.method", "expected a string");
            }
            try {
                c.method = parse_step_method(step.at("method").get<std::string>());
            } catch (const LabError &e) {
                schema_error("step.method", e.what());
            }
        }
        if (step.contains("pole_guard")) {
            c.pole_guard = read_double(step.at("pole_guard"), "step.pole_guard");
        }
    }
    if (!(c.h > 0.0)) {
        schema_error("step.h", "must be positive");
    }

    if (j.contains("z_samples")) {
        const CVector z = read_complex_vector(j.at("z_samples"), "z_samples");
        c.z_samples.assign(z.data(), z.data() + z.size());
    }
    if (j.contains("outputs")) {
        const auto &o = j.at("outputs");
        if (o.contains("trajectory_csv")) {
            c.outputs.trajectory_csv = o.at("trajectory_csv").get<std::string>();
        }
        if (o.contains("diagnostics_json")) {
            c.outputs.diagnostics_json = o.at("diagnostics_json").get<std::string>();
        }
    }
    if (j.contains("checks")) {
        if (!j.at("checks").is_array()) {
            schema_error("checks", "expected an array of suite names");
        }
        for (const auto &s : j.at("checks")) {
            c.checks.push_back(s.get<std::string>());
        }
    }
    if (j.contains("residue_sum_mode")) {
        c.residue_sum_mode = j.at("residue_sum_mode").get<std::string>();
        if (c.residue_sum_mode != "monitor") {
            schema_error("residue_sum_mode", "only \"monitor\" is supported");
        }
    }
    return c;
}

inline json read_json_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::config, "cannot read " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        fail(ErrorKind::config, path + ": " + e.what());
    }
}

inline RunConfig load_run_config(const std::string &path)
{
    try {
        return parse_run_config(read_json_file(path));
    } catch (const json::exception &e) {
        fail(ErrorKind::config, path + ": " + e.what());
    }
}

// Builds the model and the initial state described by the config.
inline ModelAndState instantiate(const RunConfig &c)
{
    if (c.random_state) {
        std::mt19937_64 rng(c.random_state->seed);
        return random_configuration(c.model, rng, c.random_state->scale, c.random_state->margin);
    }
    const auto &es = *c.explicit_state;
    if (es.residues.size() != c.model.marked_points.size()) {
        fail(ErrorKind::config, "one residue per marked point is required");
    }
    for (const auto &r : es.residues) {
        if (std::abs(r.trace()) > 1e-12 * std::max(1.0, r.norm())) {
            fail(ErrorKind::config, "residues must be traceless");
        }
    }
    if (c.model.genus == 1 && (es.q.size() != c.model.m - 1 || es.p.size() != c.model.m - 1)) {
        fail(ErrorKind::config, "q and p need m - 1 entries");
    }
    try {
        return model_from_residues(c.model, es.residues, es.q, es.p);
    } catch (const LabError &e) {
        if (e.kind() == ErrorKind::pole || e.kind() == ErrorKind::resonance) {
            throw;
        }
        fail(ErrorKind::config, e.what());
    }
}

// ---- outputs ----------------------------------------------------------------

inline void write_text(const std::string &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorKind::config, "cannot write " + path);
    }
    out << text;
}

// One row per sample: segment, t^1..t^n, H_1..H_n, casimir_drift,
// residue_sum_norm, then the characteristic coefficients of L(z_s).
inline std::string trajectory_csv(const GaudinModel &model, const Trajectory &traj, const std::vector<cplx> &z_samples, std::uint64_t seed)
{
    std::ostringstream os;
    const std::size_t n = model.num_hamiltonians();
    os << "# seed " << seed << "\n";
    os << "segment";
    for (std::size_t i = 0; i < n; ++i) {
        os << ",t" << i + 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        os << ",H" << i + 1 << "_re,H" << i + 1 << "_im";
    }
    os << ",casimir_drift,residue_sum_norm";
    for (std::size_t s = 0; s < z_samples.size(); ++s) {
        for (int k = 1; k <= model.m(); ++k) {
            os << ",z" << s + 1 << "_c" << k << "_re,z" << s + 1 << "_c" << k << "_im";
        }
    }
    os << "\n";
    std::vector<CVector> cas0;
    for (const auto &seed_matrix : model.orbit_seeds()) {
        cas0.push_back(characteristic_coefficients(-seed_matrix));
    }
    for (const auto &sample : traj.samples) {
        const auto res = orbit_elements(model, sample.state);
        os << sample.segment;
        for (std::size_t i = 0; i < n; ++i) {
            os << "," << format_double(sample.state.t(static_cast<Eigen::Index>(i)));
        }
        for (std::size_t i = 0; i < n; ++i) {
            const cplx h = hamiltonian(model, sample.state, i);
            os << "," << format_double(h.real()) << "," << format_double(h.imag());
        }
        double cas = 0.0;
        for (std::size_t a = 0; a < res.size(); ++a) {
            cas = std::max(cas, (characteristic_coefficients(res[a]) - cas0[a]).cwiseAbs().maxCoeff());
        }
        os << "," << format_double(cas) << "," << format_double(residue_sum(model, res).norm());
        for (const auto &coeffs : spectral_coefficients(model, sample.state, z_samples)) {
            for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
                os << "," << format_double(coeffs(k).real()) << "," << format_double(coeffs(k).imag());
            }
        }
        os << "\n";
    }
    return os.str();
}

inline json to_json(const DiagnosticsReport &r)
{
    json j;
    j["hamiltonian_drift"] = r.hamiltonian_drift;
    j["casimir_drift"] = r.casimir_drift;
    j["residue_sum_drift"] = r.residue_sum_drift;
    j["residue_sum_mode"] = r.residue_sum_mode;
    j["isospectral_drift"] = r.isospectral_drift;
    j["closure_values"] = r.closure_values;
    j["zero_curvature_residual"] = r.zero_curvature_residual;
    return j;
}

inline json to_json(const AbortInfo &a)
{
    json j;
    j["reason"] = a.reason;
    j["segment"] = a.segment;
    j["last_good_t"] = std::vector<double>(a.last_good_t.data(), a.last_good_t.data() + a.last_good_t.size());
    return j;
}

inline std::string dump(const json &j)
{
    return j.dump(2) + "\n";
}

} // namespace gaudin_lab::io

#endif
