#pragma once

#include "mcdual/bifurcation.hpp"
#include "mcdual/cli/config.hpp"
#include "mcdual/concentration.hpp"
#include "mcdual/forced.hpp"
#include "mcdual/scattering.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace mcdual::cli {

/// Output file could not be written (exit status 5).
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum ExitStatus : int { ok = 0, parse_failure = 2, validation_failure = 3, numerical_failure = 4, io_failure = 5 };

namespace detail {

inline json vec_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

inline json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

inline std::vector<double> grid(const Interval& r, std::size_t points)
{
    std::vector<double> x(points);
    for (std::size_t k = 0; k < points; ++k) {
        x[k] = k + 1 == points ? r.hi : r.lo + r.width() * static_cast<double>(k) / static_cast<double>(points - 1);
    }
    return x;
}

inline json trajectory_json(const Trajectory& traj)
{
    json j = json::object();
    j["coordinate_names"] = traj.coordinate_names;
    j["e_params"] = traj.e_params;
    j["rel_tol"] = traj.rel_tol;
    j["abs_tol"] = traj.abs_tol;
    j["growth_flag"] = traj.growth_flag;
    j["max_defect_ratio"] = traj.max_defect_ratio;
    json samples = json::array();
    for (const auto& s : traj.samples) {
        samples.push_back({{"t", s.t}, {"z", vec_json(s.z)}, {"zdot", vec_json(s.zdot)}});
    }
    j["samples"] = std::move(samples);
    return j;
}

inline void relabel(Trajectory& traj, Interpretation interp)
{
    if (interp == Interpretation::single_particle_3d && traj.dimension() == 3) {
        traj.coordinate_names = {"x", "y", "z"};
    }
}

struct Rendered {
    std::string csv;
    json structured = json::object();
};

inline Rendered run_potential(const RunConfig& cfg, const GridParams& g)
{
    const PotentialMatrix v = cfg.model.potential();
    const std::size_t n = v.size();
    const auto xs = grid(g.range.value_or(v.working_interval()), g.points);
    std::ostringstream csv;
    csv << 'x';
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            csv << ",v_" << i << '_' << j;
        }
    }
    csv << '\n';
    json samples = json::array();
    Eigen::MatrixXd m;
    for (double x : xs) {
        v.evaluate_into(x, m);
        csv << format_number(x);
        json rows = json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            rows.push_back(vec_json(m.row(i).transpose()));
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                csv << ',' << format_number(m(i, j));
            }
        }
        csv << '\n';
        samples.push_back({{"x", x}, {"v", std::move(rows)}});
    }
    Rendered r;
    r.csv = csv.str();
    r.structured = {{"command", "potential"}, {"source", v.label()}, {"n_channels", n}, {"samples", samples}};
    return r;
}

inline Rendered run_bound_state(const RunConfig& cfg, const GridParams& g)
{
    const BoundState b = bound_state(cfg.model.spectral);
    const PotentialMatrix v = cfg.model.potential();
    const auto xs = grid(g.range.value_or(v.working_interval()), g.points);
    std::ostringstream csv;
    csv << 'x';
    for (std::size_t i = 1; i <= b.size(); ++i) {
        csv << ",psi_" << i;
    }
    csv << '\n';
    json samples = json::array();
    for (double x : xs) {
        const Eigen::VectorXd psi = b.components(x);
        csv << format_number(x);
        for (Eigen::Index i = 0; i < psi.size(); ++i) {
            csv << ',' << format_number(psi[i]);
        }
        csv << '\n';
        samples.push_back({{"x", x}, {"psi", vec_json(psi)}});
    }
    Rendered r;
    r.csv = csv.str();
    r.structured = {{"command", "bound-state"},
                    {"energy", b.energy()},
                    {"channel_norms", b.channel_norms()},
                    {"total_norm", b.total_norm()},
                    {"fractions", b.fractions()},
                    {"samples", samples}};
    return r;
}

inline Rendered run_trajectory(const RunConfig& cfg, const TrajectoryParams& t)
{
    const PotentialMatrix v = cfg.model.potential();
    const auto& th = cfg.model.spectral.thresholds;
    Trajectory traj;
    json extra = json::object();
    IntegrateOptions io;
    io.sample_step = t.sample_step;
    switch (t.mode) {
    case TrajectoryParams::Mode::newton: {
        const ForceSystem sys = dualize(v, t.energy.resolve(th), t.interpretation);
        traj = integrate(sys, t.initial, t.t_end, cfg.rel_tol, cfg.abs_tol, io);
        break;
    }
    case TrajectoryParams::Mode::shoot: {
        ShootOptions so;
        so.rel_tol = cfg.rel_tol;
        so.abs_tol = cfg.abs_tol;
        so.integrate = io;
        const Interval dom = v.working_interval();
        traj = shoot_schrodinger(v, *t.energy.energy, th, t.x_start.value_or(dom.lo), t.x_end.value_or(dom.hi),
                                 t.start, so);
        break;
    }
    case TrajectoryParams::Mode::return_demo: {
        ScanOptions so;
        so.workers = cfg.workers;
        const ReturnDemo demo = classical_return_demo(v, th, *t.energy.energy, t.t_span, t.tolerance,
                                                      t.sample_step, so);
        traj = demo.trajectory;
        extra["return_demo"] = {{"energy", demo.energy},
                                {"returned", demo.returned},
                                {"endpoint_ratio", demo.endpoint_ratio},
                                {"endpoint_sign", demo.endpoint_sign}};
        break;
    }
    }
    relabel(traj, t.interpretation);
    if (t.fit) {
        const AsymptoticLine line = fit_asymptotic_line(traj, *t.fit, t.fit_channel);
        extra["asymptotic_line"] = {{"side", to_string(*t.fit)},
                                    {"channel", t.fit_channel + 1},
                                    {"a", line.a},
                                    {"b", line.b},
                                    {"rms_residual", line.rms_residual},
                                    {"samples_used", line.samples_used}};
    }
    Rendered r;
    std::ostringstream csv;
    write_csv(csv, traj);
    r.csv = csv.str();
    r.structured = {{"command", "trajectory"}};
    r.structured.update(extra);
    r.structured["trajectory"] = trajectory_json(traj);
    return r;
}

inline Rendered run_scan(const RunConfig& cfg, const ScanParams& s)
{
    ScanOptions so;
    so.workers = cfg.workers;
    const ScanReport rep =
        scan_bifurcations(cfg.model.potential(), cfg.model.spectral.thresholds, s.e_range, s.grid_step, s.tolerance, so);
    std::ostringstream csv;
    csv << "energy,bracket_lo,bracket_hi,node_count_below,sign_below,sign_above\n";
    json points = json::array();
    for (const auto& p : rep.bifurcation_points) {
        csv << format_number(p.energy) << ',' << format_number(p.bracket.lo) << ',' << format_number(p.bracket.hi)
            << ',' << p.node_count_below << ',' << p.sign_below << ',' << p.sign_above << '\n';
        points.push_back({{"energy", p.energy},
                          {"bracket", interval_json(p.bracket)},
                          {"node_count_below", p.node_count_below},
                          {"sign_below", p.sign_below},
                          {"sign_above", p.sign_above},
                          {"launch_weights", p.launch_weights}});
    }
    Rendered r;
    r.csv = csv.str();
    r.structured = {{"bifurcation_points", points},
                    {"scan_range", interval_json(rep.scan_range)},
                    {"grid_step", rep.grid_step},
                    {"tolerance", rep.tolerance}};
    return r;
}

inline Rendered run_concentrate(const RunConfig& cfg, const ConcentrateParams& c)
{
    const ConcentrationReport rep = concentration_sweep(cfg.model.spectral, c.target, c.m_values, cfg.workers);
    const std::size_t n = cfg.model.spectral.n_channels;
    std::ostringstream csv;
    csv << 'm';
    for (std::size_t i = 1; i <= n; ++i) {
        csv << ",n_" << i;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        csv << ",c_" << i;
    }
    csv << '\n';
    for (std::size_t k = 0; k < rep.sweep_values.size(); ++k) {
        csv << format_number(rep.sweep_values[k]);
        for (double f : rep.fractions[k]) {
            csv << ',' << format_number(f);
        }
        for (double s : rep.slopes_at_origin[k]) {
            csv << ',' << format_number(s);
        }
        csv << '\n';
    }
    Rendered r;
    r.csv = csv.str();
    r.structured = {{"target_channel", rep.target_channel + 1},
                    {"sweep_values", rep.sweep_values},
                    {"fractions", rep.fractions},
                    {"slopes_at_origin", rep.slopes_at_origin}};
    return r;
}

inline Rendered run_forced(const RunConfig& cfg, const ForcedParams& f)
{
    const ForceSystem sys =
        dualize(cfg.model.potential(), f.energy.resolve(cfg.model.spectral.thresholds), f.interpretation);
    const SourceTerm g = source_parse(f.source, sys.n_bodies());
    ForcedOptions fo;
    fo.segment_length = f.segment_length;
    fo.sample_step = f.sample_step;
    IntegrateOptions io;
    io.sample_step = f.sample_step;

    Trajectory traj;
    json extra = json::object();
    if (f.method == ForcedParams::Method::variation) {
        traj = solve_with_source(sys, g, f.initial, f.t_end, cfg.rel_tol, cfg.abs_tol, fo);
    } else {
        traj = integrate_forced(sys, g, f.initial, f.t_end, cfg.rel_tol, cfg.abs_tol, io);
    }
    if (f.cross_check) {
        const Trajectory other = f.method == ForcedParams::Method::variation
                                     ? integrate_forced(sys, g, f.initial, f.t_end, cfg.rel_tol, cfg.abs_tol, io)
                                     : solve_with_source(sys, g, f.initial, f.t_end, cfg.rel_tol, cfg.abs_tol, fo);
        const Trajectory& dense = f.method == ForcedParams::Method::variation ? other : traj;
        const Trajectory& sampled = f.method == ForcedParams::Method::variation ? traj : other;
        double diff = 0.0;
        for (const auto& s : sampled.samples) {
            const Eigen::VectorXd y = dense.state_at(s.t);
            diff = std::max(diff, (y.head(s.z.size()) - s.z).cwiseAbs().maxCoeff());
        }
        extra["cross_check"] = {{"max_abs_difference", diff}, {"samples_compared", sampled.samples.size()}};
    }
    relabel(traj, f.interpretation);
    Rendered r;
    std::ostringstream csv;
    write_csv(csv, traj);
    r.csv = csv.str();
    r.structured = {{"command", "forced"},
                    {"method", f.method == ForcedParams::Method::variation ? "variation-of-parameters" : "direct"},
                    {"source", f.source}};
    r.structured.update(extra);
    r.structured["trajectory"] = trajectory_json(traj);
    return r;
}

inline Rendered run_scatter(const RunConfig& cfg, const ScatterParams& s)
{
    const PotentialMatrix v = cfg.model.potential();
    ShootOptions so;
    so.rel_tol = cfg.rel_tol;
    so.abs_tol = cfg.abs_tol;
    std::vector<ScatteringResult> results(s.energies.size());
    parallel_for(s.energies.size(), cfg.workers, [&](std::size_t k) {
        results[k] = reflection(v, cfg.model.spectral.thresholds, s.energies[k], s.incoming, so);
    });
    std::ostringstream csv;
    csv << "energy,incoming_channel,reflection_norm,transmission_norm\n";
    json records = json::array();
    for (const auto& res : results) {
        csv << format_number(res.energy) << ',' << res.incoming_channel + 1 << ','
            << format_number(res.reflection_norm) << ',' << format_number(res.transmission_norm) << '\n';
        json refl = json::array();
        json trans = json::array();
        for (std::size_t i = 0; i < res.reflection_amplitudes.size(); ++i) {
            refl.push_back({res.reflection_amplitudes[i].real(), res.reflection_amplitudes[i].imag()});
            trans.push_back({res.transmission_amplitudes[i].real(), res.transmission_amplitudes[i].imag()});
        }
        std::vector<std::size_t> open;
        for (auto c : res.open_channels) {
            open.push_back(c + 1);
        }
        records.push_back({{"energy", res.energy},
                           {"incoming_channel", res.incoming_channel + 1},
                           {"reflection_norm", res.reflection_norm},
                           {"transmission_norm", res.transmission_norm},
                           {"open_channels", open},
                           {"reflection_amplitudes", refl},
                           {"transmission_amplitudes", trans}});
    }
    Rendered r;
    r.csv = csv.str();
    r.structured = {{"command", "scatter"}, {"results", records}};
    return r;
}

}  // namespace detail

/// Executes a validated configuration and returns the artifact text.
inline std::string execute(const RunConfig& cfg)
{
    detail::Rendered r;
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, GridParams>) {
                r = cfg.command == Command::potential ? detail::run_potential(cfg, p)
                                                      : detail::run_bound_state(cfg, p);
            } else if constexpr (std::is_same_v<P, TrajectoryParams>) {
                r = detail::run_trajectory(cfg, p);
            } else if constexpr (std::is_same_v<P, ScanParams>) {
                r = detail::run_scan(cfg, p);
            } else if constexpr (std::is_same_v<P, ConcentrateParams>) {
                r = detail::run_concentrate(cfg, p);
            } else if constexpr (std::is_same_v<P, ForcedParams>) {
                r = detail::run_forced(cfg, p);
            } else {
                r = detail::run_scatter(cfg, p);
            }
        },
        cfg.params);
    return cfg.format == Format::csv ? r.csv : r.structured.dump(2) + "\n";
}

/// Overrides applied on top of the config document by command-line flags.
struct Overrides {
    std::optional<std::string> out_path;
    std::optional<Format> format;
    std::optional<unsigned> workers;
    std::optional<double> rel_tol;
};

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot read " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline RunConfig load_config(const std::string& path, const Overrides& ov = {})
{
    RunConfig cfg = read_config(parse_document(read_file(path)));
    if (ov.out_path) {
        cfg.out_path = *ov.out_path;
    }
    if (ov.format) {
        cfg.format = *ov.format;
    }
    if (ov.workers) {
        cfg.workers = *ov.workers;
    }
    if (ov.rel_tol) {
        check_tolerances(*ov.rel_tol, cfg.abs_tol);
        cfg.rel_tol = *ov.rel_tol;
    }
    return cfg;
}

inline void write_artifact(const std::string& text, const std::string& path, std::ostream& fallback)
{
    if (path.empty() || path == "-") {
        fallback << text;
        fallback.flush();
        if (!fallback) {
            throw io_error("cannot write output");
        }
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) {
        throw io_error("cannot write " + path);
    }
}

/// Machine-readable error record written to stderr on failure.
inline std::string error_record(int status, const std::string& kind, const std::string& message)
{
    return json({{"error", {{"status", status}, {"kind", kind}, {"message", message}}}}).dump();
}

/// Loads, validates and executes one configuration. Returns the process
/// exit status; failures are reported as a single JSON line on `err`.
inline int run(const std::string& config_path, const Overrides& ov, std::ostream& out, std::ostream& err)
{
    const auto fail = [&](int status, const std::string& kind, const std::string& message) {
        err << error_record(status, kind, message) << '\n';
        return status;
    };
    try {
        const RunConfig cfg = load_config(config_path, ov);
        write_artifact(execute(cfg), cfg.out_path, out);
        return ok;
    } catch (const parse_error& e) {
        return fail(parse_failure, "parse", e.what());
    } catch (const validation_error& e) {
        return fail(validation_failure, "validation", e.what());
    } catch (const numerical_error& e) {
        return fail(numerical_failure, "numerical", e.what());
    } catch (const io_error& e) {
        return fail(io_failure, "io", e.what());
    }
}

}  // namespace mcdual::cli
