#pragma once

#include "mcdual/asymptotics.hpp"
#include "mcdual/bound_state.hpp"
#include "mcdual/cli/source_parse.hpp"
#include "mcdual/duality.hpp"
#include "mcdual/potential.hpp"
#include "mcdual/shooting.hpp"
#include "mcdual/spectral.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace mcdual::cli {

using json = nlohmann::json;

enum class Command { potential, bound_state, trajectory, scan, concentrate, forced, scatter };
enum class Format { csv, structured_text };

inline const std::vector<std::pair<std::string, Command>>& command_names()
{
    static const std::vector<std::pair<std::string, Command>> names = {
        {"potential", Command::potential}, {"bound-state", Command::bound_state},
        {"trajectory", Command::trajectory}, {"scan", Command::scan},
        {"concentrate", Command::concentrate}, {"forced", Command::forced},
        {"scatter", Command::scatter}};
    return names;
}

inline std::string to_string(Command c)
{
    for (const auto& [name, value] : command_names()) {
        if (value == c) {
            return name;
        }
    }
    return "?";
}

inline Format parse_format(const std::string& s)
{
    if (s == "csv") {
        return Format::csv;
    }
    if (s == "structured-text") {
        return Format::structured_text;
    }
    throw parse_error("format must be csv or structured-text, got '" + s + "'");
}

struct ModelSpec {
    enum class Kind { reflectionless, zero };
    Kind kind = Kind::reflectionless;
    /// For the zero model only n_channels and thresholds are meaningful.
    SpectralData spectral;

    PotentialMatrix potential() const
    {
        return kind == Kind::zero ? zero_potential(spectral.n_channels) : build_reflectionless(spectral);
    }
};

struct GridParams {
    std::optional<Interval> range;
    std::size_t points = 2001;
};

/// Force parameters given either as one quantum energy or as raw E_i.
struct EnergySpec {
    std::optional<double> energy;
    std::vector<double> e_params;

    std::vector<double> resolve(std::span<const double> thresholds) const
    {
        return energy ? channel_energies(*energy, thresholds) : e_params;
    }
};

struct TrajectoryParams {
    enum class Mode { newton, shoot, return_demo };
    Mode mode = Mode::newton;
    EnergySpec energy;
    Interpretation interpretation = Interpretation::few_body;
    ClassicalState initial;
    double t_end = 0.0;
    StartMode start = Decaying{};
    std::optional<double> x_start;
    std::optional<double> x_end;
    std::optional<Interval> t_span;
    double tolerance = 1e-8;
    double sample_step = 0.0;
    std::optional<Side> fit;
    std::size_t fit_channel = 0;
};

struct ScanParams {
    Interval e_range;
    double grid_step = 0.0;
    double tolerance = 0.0;
};

struct ConcentrateParams {
    std::size_t target = 0;
    std::vector<double> m_values;
};

struct ForcedParams {
    enum class Method { variation, direct };
    EnergySpec energy;
    Interpretation interpretation = Interpretation::few_body;
    std::string source;
    ClassicalState initial;
    double t_end = 0.0;
    Method method = Method::variation;
    double sample_step = 0.0;
    double segment_length = 1.0;
    bool cross_check = false;
};

struct ScatterParams {
    std::vector<double> energies;
    std::size_t incoming = 0;
};

using CommandParams =
    std::variant<GridParams, TrajectoryParams, ScanParams, ConcentrateParams, ForcedParams, ScatterParams>;

struct RunConfig {
    ModelSpec model;
    Command command = Command::potential;
    CommandParams params;
    std::string out_path;
    Format format = Format::csv;
    unsigned workers = 0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
};

namespace detail {

/// Typed, path-aware access to one JSON object. Every key must be consumed;
/// leftovers are reported as unknown.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) {
            fail("expected an object");
        }
    }

    ~Node() = default;
    Node(const Node&) = delete;
    Node& operator=(const Node&) = delete;

    bool has(const std::string& key) const { return j_.contains(key); }

    double number(const std::string& key)
    {
        const json& v = at(key);
        if (!v.is_number()) {
            fail_key(key, "expected a number");
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            fail_key(key, "expected a finite number");
        }
        return d;
    }

    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::optional<double> optional_number(const std::string& key)
    {
        return has(key) ? std::optional<double>(number(key)) : std::nullopt;
    }

    std::size_t count(const std::string& key)
    {
        const json& v = at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            fail_key(key, "expected a nonnegative integer");
        }
        return v.get<std::size_t>();
    }

    std::size_t count(const std::string& key, std::size_t fallback) { return has(key) ? count(key) : fallback; }

    /// 1-based channel index in the document, 0-based in the result.
    std::size_t channel(const std::string& key, std::size_t n)
    {
        const std::size_t c = count(key);
        if (c < 1 || c > n) {
            throw validation_error("config: " + path_ + "/" + key + ": channel index must be in 1.." +
                                   std::to_string(n));
        }
        return c - 1;
    }

    std::size_t channel(const std::string& key, std::size_t n, std::size_t fallback)
    {
        return has(key) ? channel(key, n) : fallback;
    }

    bool boolean(const std::string& key, bool fallback)
    {
        if (!has(key)) {
            return fallback;
        }
        const json& v = at(key);
        if (!v.is_boolean()) {
            fail_key(key, "expected true or false");
        }
        return v.get<bool>();
    }

    std::string string(const std::string& key)
    {
        const json& v = at(key);
        if (!v.is_string()) {
            fail_key(key, "expected a string");
        }
        return v.get<std::string>();
    }

    std::string string(const std::string& key, const std::string& fallback)
    {
        return has(key) ? string(key) : fallback;
    }

    std::vector<double> numbers(const std::string& key)
    {
        const json& v = at(key);
        if (!v.is_array()) {
            fail_key(key, "expected an array of numbers");
        }
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number() || !std::isfinite(e.get<double>())) {
                fail_key(key, "expected an array of finite numbers");
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    Interval interval(const std::string& key)
    {
        const auto v = numbers(key);
        if (v.size() != 2) {
            fail_key(key, "expected [lo, hi]");
        }
        if (!(v[0] < v[1])) {
            throw validation_error(path_ + "/" + key + ": need lo < hi");
        }
        return {v[0], v[1]};
    }

    std::optional<Interval> optional_interval(const std::string& key)
    {
        return has(key) ? std::optional<Interval>(interval(key)) : std::nullopt;
    }

    Node child(const std::string& key)
    {
        const json& v = at(key);
        return Node(v, path_ + "/" + key);
    }

    const std::string& path() const { return path_; }

    void finish() const
    {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) {
                throw parse_error("config: " + path_ + "/" + key + ": unknown key");
            }
        }
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw parse_error("config: " + (path_.empty() ? std::string("/") : path_) + ": " + what);
    }

    [[noreturn]] void fail_key(const std::string& key, const std::string& what) const
    {
        throw parse_error("config: " + path_ + "/" + key + ": " + what);
    }

private:
    const json& at(const std::string& key)
    {
        if (!j_.contains(key)) {
            fail_key(key, "missing");
        }
        used_.insert(key);
        return j_.at(key);
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

inline ModelSpec read_model(Node& m)
{
    ModelSpec spec;
    const std::string kind = m.string("kind", "reflectionless");
    if (kind == "zero") {
        spec.kind = ModelSpec::Kind::zero;
    } else if (kind != "reflectionless") {
        m.fail_key("kind", "expected reflectionless or zero");
    }
    auto& s = spec.spectral;
    s.n_channels = m.count("n_channels");
    if (s.n_channels == 0) {
        throw validation_error("model: n_channels must be positive");
    }
    if (spec.kind == ModelSpec::Kind::zero) {
        s.thresholds = m.has("thresholds") ? m.numbers("thresholds") : std::vector<double>(s.n_channels, 0.0);
        if (s.thresholds.size() != s.n_channels) {
            throw validation_error("model: thresholds must have n_channels entries");
        }
    } else {
        s.thresholds = m.numbers("thresholds");
        s.e_bound = m.number("e_bound");
        s.weights = m.numbers("weights");
        validate(s);
    }
    m.finish();
    return spec;
}

inline EnergySpec read_energy(Node& p, std::size_t n)
{
    EnergySpec e;
    if (p.has("energy") == p.has("e_params")) {
        p.fail("give exactly one of energy or e_params");
    }
    if (p.has("energy")) {
        e.energy = p.number("energy");
    } else {
        e.e_params = p.numbers("e_params");
        if (e.e_params.size() != n) {
            throw validation_error(p.path() + "/e_params: need one entry per channel");
        }
    }
    return e;
}

inline Interpretation read_interpretation(Node& p, std::size_t n)
{
    const std::string s = p.string("interpretation", "few-body");
    if (s == "few-body") {
        return Interpretation::few_body;
    }
    if (s == "single-particle-3d") {
        if (n != 3) {
            throw validation_error(p.path() + "/interpretation: single-particle-3d needs exactly 3 channels");
        }
        return Interpretation::single_particle_3d;
    }
    p.fail_key("interpretation", "expected few-body or single-particle-3d");
}

inline ClassicalState read_state(Node& s, std::size_t n)
{
    ClassicalState st;
    st.t = s.number("t");
    const auto z = s.numbers("z");
    const auto zdot = s.numbers("zdot");
    if (z.size() != n || zdot.size() != n) {
        throw validation_error(s.path() + ": z and zdot need one entry per channel");
    }
    st.z = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(n));
    st.zdot = Eigen::Map<const Eigen::VectorXd>(zdot.data(), static_cast<Eigen::Index>(n));
    s.finish();
    return st;
}

inline StartMode read_start(Node& s, std::size_t n)
{
    const std::string kind = s.string("kind");
    StartMode mode;
    if (kind == "decaying") {
        Decaying d;
        if (s.has("weights")) {
            d.weights = s.numbers("weights");
            if (d.weights.size() != n) {
                throw validation_error(s.path() + "/weights: need one entry per channel");
            }
        }
        mode = d;
    } else if (kind == "line") {
        mode = Line{s.number("a"), s.number("b"), s.channel("channel", n, 0)};
    } else if (kind == "plane-wave") {
        mode = PlaneWave{s.channel("channel", n, 0)};
    } else {
        s.fail_key("kind", "expected decaying, line or plane-wave");
    }
    s.finish();
    return mode;
}

inline void check_span(double t0, double t1, const std::string& what)
{
    if (t0 == t1) {
        throw validation_error(what + ": empty integration span");
    }
}

inline double read_sample_step(Node& p, double fallback)
{
    const double h = p.number("sample_step", fallback);
    if (h < 0.0) {
        throw validation_error(p.path() + "/sample_step: must be nonnegative");
    }
    return h;
}

inline TrajectoryParams read_trajectory(Node& p, const ModelSpec& model)
{
    const std::size_t n = model.spectral.n_channels;
    const auto& th = model.spectral.thresholds;
    TrajectoryParams t;
    const std::string mode = p.string("mode", "newton");
    t.interpretation = read_interpretation(p, n);
    if (mode == "newton") {
        t.mode = TrajectoryParams::Mode::newton;
        t.energy = read_energy(p, n);
        auto init = p.child("initial");
        t.initial = read_state(init, n);
        t.t_end = p.number("t_end");
        check_span(t.initial.t, t.t_end, "trajectory");
        t.sample_step = read_sample_step(p, 0.0);
    } else if (mode == "shoot") {
        t.mode = TrajectoryParams::Mode::shoot;
        t.energy.energy = p.number("energy");
        auto start = p.child("start");
        t.start = read_start(start, n);
        t.x_start = p.optional_number("x_start");
        t.x_end = p.optional_number("x_end");
        t.sample_step = read_sample_step(p, 0.0);
        const double e = *t.energy.energy;
        if (std::holds_alternative<Decaying>(t.start)) {
            for (double eps : th) {
                if (!(e < eps)) {
                    throw validation_error("trajectory: decaying start needs E below every threshold");
                }
            }
        } else if (const auto* l = std::get_if<Line>(&t.start)) {
            if (std::abs(e - th[l->channel]) > 1e-12) {
                throw validation_error("trajectory: line start needs E equal to the launch channel threshold");
            }
        } else {
            const auto& pw = std::get<PlaneWave>(t.start);
            if (!(e > th[pw.channel])) {
                throw validation_error("trajectory: plane-wave start needs an open channel");
            }
            if (t.interpretation != Interpretation::few_body) {
                throw validation_error("trajectory: plane-wave output has its own re/im labels");
            }
        }
    } else if (mode == "return-demo") {
        t.mode = TrajectoryParams::Mode::return_demo;
        t.energy.energy = p.number("energy");
        t.t_span = p.optional_interval("t_span");
        t.tolerance = p.number("tolerance", 1e-8);
        t.sample_step = read_sample_step(p, 0.05);
        if (!(t.tolerance > 0.0)) {
            throw validation_error("trajectory: tolerance must be positive");
        }
        if (!(*t.energy.energy < *std::min_element(th.begin(), th.end()))) {
            throw validation_error("trajectory: return demo needs E below every threshold");
        }
    } else {
        p.fail_key("mode", "expected newton, shoot or return-demo");
    }
    if (p.has("fit")) {
        const std::string side = p.string("fit");
        if (side != "left" && side != "right") {
            p.fail_key("fit", "expected left or right");
        }
        t.fit = side == "left" ? Side::left : Side::right;
        t.fit_channel = p.channel("fit_channel", n, 0);
        const auto e = t.energy.resolve(th);
        if (std::abs(e[t.fit_channel]) > 1e-12) {
            throw validation_error("trajectory: asymptote is not a line (fitted channel has E_i != 0)");
        }
    }
    return t;
}

inline ScanParams read_scan(Node& p, const ModelSpec& model)
{
    ScanParams s;
    s.e_range = p.interval("e_range");
    s.grid_step = p.number("grid_step");
    s.tolerance = p.number("tolerance", 1e-8);
    const auto& th = model.spectral.thresholds;
    if (!(s.e_range.hi < *std::min_element(th.begin(), th.end()))) {
        throw validation_error("scan: e_range must lie strictly below every threshold");
    }
    if (!(s.tolerance > 0.0) || !(s.grid_step > s.tolerance)) {
        throw validation_error("scan: need grid_step > tolerance > 0");
    }
    return s;
}

inline ConcentrateParams read_concentrate(Node& p, const ModelSpec& model)
{
    if (model.kind != ModelSpec::Kind::reflectionless) {
        throw validation_error("concentrate: needs a reflectionless model");
    }
    ConcentrateParams c;
    c.target = p.channel("target", model.spectral.n_channels);
    c.m_values = p.numbers("m_values");
    if (c.m_values.empty()) {
        throw validation_error("concentrate: m_values is empty");
    }
    for (std::size_t k = 0; k < c.m_values.size(); ++k) {
        if (!(c.m_values[k] > 0.0) || (k > 0 && !(c.m_values[k] > c.m_values[k - 1]))) {
            throw validation_error("concentrate: m_values must be positive and increasing");
        }
    }
    return c;
}

inline ForcedParams read_forced(Node& p, const ModelSpec& model)
{
    const std::size_t n = model.spectral.n_channels;
    ForcedParams f;
    f.energy = read_energy(p, n);
    f.interpretation = read_interpretation(p, n);
    f.source = p.string("source");
    source_parse(f.source, n);
    auto init = p.child("initial");
    f.initial = read_state(init, n);
    f.t_end = p.number("t_end");
    check_span(f.initial.t, f.t_end, "forced");
    const std::string method = p.string("method", "variation-of-parameters");
    if (method == "direct") {
        f.method = ForcedParams::Method::direct;
    } else if (method != "variation-of-parameters") {
        p.fail_key("method", "expected variation-of-parameters or direct");
    }
    f.sample_step = read_sample_step(p, 0.0);
    f.segment_length = p.number("segment_length", 1.0);
    if (!(f.segment_length > 0.0)) {
        throw validation_error("forced: segment_length must be positive");
    }
    f.cross_check = p.boolean("cross_check", false);
    return f;
}

inline ScatterParams read_scatter(Node& p, const ModelSpec& model)
{
    ScatterParams s;
    s.energies = p.numbers("energies");
    s.incoming = p.channel("incoming_channel", model.spectral.n_channels, 0);
    if (s.energies.empty()) {
        throw validation_error("scatter: energies is empty");
    }
    const auto& th = model.spectral.thresholds;
    const double top = *std::max_element(th.begin(), th.end());
    for (double e : s.energies) {
        if (!(e > top)) {
            throw validation_error("scatter: every energy must lie above all thresholds (all channels open)");
        }
    }
    return s;
}

inline GridParams read_grid(Node& p, const ModelSpec& model, Command command)
{
    if (command == Command::bound_state && model.kind != ModelSpec::Kind::reflectionless) {
        throw validation_error("bound-state: needs a reflectionless model");
    }
    GridParams g;
    g.range = p.optional_interval("x_range");
    g.points = p.count("points", 2001);
    if (g.points < 2) {
        throw validation_error("points must be at least 2");
    }
    return g;
}

}  // namespace detail

/// Builds a validated RunConfig from a parsed document. Throws parse_error
/// for malformed documents and validation_error for inputs that violate the
/// preconditions of the requested command. No integration happens here.
inline RunConfig read_config(const json& doc)
{
    detail::Node root(doc, "");
    RunConfig cfg;
    {
        auto m = root.child("model");
        cfg.model = detail::read_model(m);
    }
    const std::string command = root.string("command");
    const auto it = std::find_if(command_names().begin(), command_names().end(),
                                 [&](const auto& p) { return p.first == command; });
    if (it == command_names().end()) {
        root.fail_key("command", "unknown command '" + command + "'");
    }
    cfg.command = it->second;

    cfg.rel_tol = root.number("rel_tol", cfg.rel_tol);
    cfg.abs_tol = root.number("abs_tol", cfg.abs_tol);
    check_tolerances(cfg.rel_tol, cfg.abs_tol);
    const std::size_t workers = root.count("workers", 0);
    cfg.workers = static_cast<unsigned>(std::min<std::size_t>(workers, 1024));

    if (root.has("output")) {
        auto o = root.child("output");
        cfg.out_path = o.string("path", "");
        cfg.format = parse_format(o.string("format", "csv"));
        o.finish();
    }

    json empty = json::object();
    const bool has_params = root.has("parameters");
    detail::Node p = has_params ? root.child("parameters") : detail::Node(empty, "/parameters");
    switch (cfg.command) {
    case Command::potential:
    case Command::bound_state:
        cfg.params = detail::read_grid(p, cfg.model, cfg.command);
        break;
    case Command::trajectory:
        cfg.params = detail::read_trajectory(p, cfg.model);
        break;
    case Command::scan:
        cfg.params = detail::read_scan(p, cfg.model);
        break;
    case Command::concentrate:
        cfg.params = detail::read_concentrate(p, cfg.model);
        break;
    case Command::forced:
        cfg.params = detail::read_forced(p, cfg.model);
        break;
    case Command::scatter:
        cfg.params = detail::read_scatter(p, cfg.model);
        break;
    }
    p.finish();
    root.finish();
    return cfg;
}

inline json parse_document(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("config: ") + e.what());
    }
}

}  // namespace mcdual::cli
