// Command implementations behind the gaudin-lab executable. Argument parsing
// lives in the tool; these functions take resolved arguments and streams so
// they can be driven from tests as well.

#ifndef GAUDIN_LAB_LAB_CLI_HPP
#define GAUDIN_LAB_LAB_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gaudin_lab/errors.hpp"
#include "gaudin_lab/io.hpp"
#include "gaudin_lab/phase_flows.hpp"
#include "gaudin_lab/verify/suites.hpp"

namespace gaudin_lab::cli
{

enum ExitCode : int {
    exit_ok = 0,
    exit_check_failure = 1,
    exit_config_error = 2,
    exit_numerical_abort = 3,
};

namespace detail
{

// Relative paths land in out_dir when one is given.
inline std::string resolve_output(const std::string &path, const std::string &fallback, const std::string &out_dir)
{
    std::filesystem::path p = path.empty() ? std::filesystem::path(fallback) : std::filesystem::path(path);
    if (!out_dir.empty() && p.is_relative()) {
        p = std::filesystem::path(out_dir) / p;
    }
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path());
    }
    return p.string();
}

inline bool numerical(ErrorKind k)
{
    return k == ErrorKind::pole || k == ErrorKind::resonance || k == ErrorKind::non_finite;
}

inline std::vector<double> to_std(const RVector &v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline io::json model_summary(const ModelSpec &s)
{
    io::json j;
    j["genus"] = s.genus;
    j["m"] = s.m;
    j["marked_points"] = s.marked_points.size();
    j["hamiltonians"] = s.hamiltonians.size();
    return j;
}

inline std::vector<verify::CriterionReport> run_suite(const std::string &suite, std::uint64_t seed)
{
    std::vector<verify::CriterionReport> reports;
    for (int id : verify::suite_criteria(suite)) {
        reports.push_back(verify::run_criterion(id, seed));
    }
    return reports;
}

inline bool all_pass(const std::vector<verify::CriterionReport> &reports)
{
    for (const auto &r : reports) {
        if (!r.pass()) {
            return false;
        }
    }
    return true;
}

inline void print_summary(std::ostream &os, const std::string &suite, const std::vector<verify::CriterionReport> &reports)
{
    for (const auto &r : reports) {
        os << (r.pass() ? "PASS" : "FAIL") << " criterion " << r.id << ": " << r.title << "\n";
        for (const auto &c : r.checks) {
            if (!c.pass) {
                os << "  failed: " << c.name << " (measured " << io::format_double(c.measured) << ", " << c.anchor << ")\n";
            }
        }
    }
    os << suite << ": " << (all_pass(reports) ? "PASS" : "FAIL") << "\n";
}

} // namespace detail

// Runs a simulation from a config file. Writes the trajectory CSV and the
// diagnostics JSON and returns one of the exit codes above.
inline int cmd_simulate(const std::string &config_path, const std::string &out_dir, std::ostream &out, std::ostream &err)
{
    io::RunConfig cfg;
    try {
        cfg = io::load_run_config(config_path);
        for (const auto &s : cfg.checks) {
            verify::suite_criteria(s);
        }
    } catch (const LabError &e) {
        err << e.what() << "\n";
        return exit_config_error;
    }

    const std::string stem = std::filesystem::path(config_path).stem().string();
    std::string csv_path, json_path;
    try {
        csv_path = detail::resolve_output(cfg.outputs.trajectory_csv, stem + ".trajectory.csv", out_dir);
        json_path = detail::resolve_output(cfg.outputs.diagnostics_json, stem + ".diagnostics.json", out_dir);
    } catch (const std::filesystem::filesystem_error &e) {
        err << "config error: cannot create output directory: " << e.what() << "\n";
        return exit_config_error;
    }

    io::json report;
    report["seed"] = cfg.seed();
    report["model"] = detail::model_summary(cfg.model);
    auto write_abort = [&](const AbortInfo &a) {
        report["status"] = "aborted";
        report["abort"] = io::to_json(a);
        io::write_text(json_path, io::dump(report));
        err << "numerical abort: " << a.reason << " (last good t = [";
        for (Eigen::Index i = 0; i < a.last_good_t.size(); ++i) {
            err << (i ? ", " : "") << io::format_double(a.last_good_t(i));
        }
        err << "])\n";
        return exit_numerical_abort;
    };

    try {
        std::optional<ModelAndState> built;
        try {
            built.emplace(io::instantiate(cfg));
            cfg.curve.validate(built->model.num_hamiltonians());
        } catch (const LabError &e) {
            if (!detail::numerical(e.kind())) {
                err << e.what() << "\n";
                return exit_config_error;
            }
            const RVector t0 = cfg.curve.waypoints.empty() ? RVector() : cfg.curve.waypoints.front();
            return write_abort(AbortInfo{e.what(), 0, t0});
        }
        const ModelAndState &ms = *built;

        const auto run = evolve_checked(ms.model, ms.state, cfg.curve, cfg.h, cfg.method, cfg.pole_guard);
        const auto &traj = run.trajectory;
        io::write_text(csv_path, io::trajectory_csv(ms.model, traj, cfg.z_samples, cfg.seed()));
        report["samples"] = traj.samples.size();
        if (!traj.samples.empty()) {
            report["final_t"] = detail::to_std(traj.samples.back().state.t);
            auto diag = diagnostics(ms.model, traj, cfg.z_samples);
            diag.residue_sum_mode = cfg.residue_sum_mode;
            report["diagnostics"] = io::to_json(diag);
        }
        if (run.abort) {
            return write_abort(*run.abort);
        }
        report["status"] = "ok";

        bool pass = true;
        if (!cfg.checks.empty()) {
            const std::uint64_t seed = cfg.random_state ? cfg.seed() : verify::default_seed;
            io::json suites = io::json::array();
            for (const auto &s : cfg.checks) {
                const auto reports = detail::run_suite(s, seed);
                pass = pass && detail::all_pass(reports);
                suites.push_back(verify::suite_report(s, seed, reports));
                detail::print_summary(out, s, reports);
            }
            report["checks"] = std::move(suites);
        }
        io::write_text(json_path, io::dump(report));
        out << "wrote " << csv_path << " and " << json_path << "\n";
        return pass ? exit_ok : exit_check_failure;
    } catch (const LabError &e) {
        if (detail::numerical(e.kind())) {
            return write_abort(AbortInfo{e.what(), 0, RVector()});
        }
        err << e.what() << "\n";
        return exit_config_error;
    }
}

// Runs a verification suite. The JSON report goes to out_dir when given and
// to `out` otherwise; the human summary goes to the other stream.
inline int cmd_verify(const std::string &suite, std::uint64_t seed, const std::string &out_dir, std::ostream &out, std::ostream &err)
{
    try {
        verify::suite_criteria(suite);
    } catch (const LabError &e) {
        err << e.what() << "; known suites:";
        for (const auto &s : verify::suite_names()) {
            err << " " << s;
        }
        err << "\n";
        return exit_config_error;
    }
    const auto reports = detail::run_suite(suite, seed);
    const std::string text = io::dump(verify::suite_report(suite, seed, reports));
    if (out_dir.empty()) {
        out << text;
        detail::print_summary(err, suite, reports);
    } else {
        try {
            const std::string path = detail::resolve_output("verify-" + suite + ".json", "", out_dir);
            io::write_text(path, text);
            detail::print_summary(out, suite, reports);
            out << "report: " << path << "\n";
        } catch (const std::exception &e) {
            err << "cannot write report: " << e.what() << "\n";
            return exit_config_error;
        }
    }
    return detail::all_pass(reports) ? exit_ok : exit_check_failure;
}

} // namespace gaudin_lab::cli

#endif
