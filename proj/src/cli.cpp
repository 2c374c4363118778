#include "causal/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "causal/acceptance.hpp"
#include "causal/classical.hpp"
#include "causal/detector.hpp"
#include "causal/errors.hpp"
#include "causal/quantum_toa.hpp"
#include "causal/wiener.hpp"
#include "json.hpp"

namespace causal::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class Csv {
public:
    explicit Csv(std::ostream& out) : out_(out) {}
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

private:
    std::ostream& out_;
};

const std::vector<KeySpec> kCommon = {
    {"seed", "1", "master random seed"},
    {"out", "", "CSV output path (default: stdout)"},
    {"summary", "", "JSON summary path (default: <out>.json, or stderr when writing to stdout)"},
};

const std::map<std::string, std::vector<KeySpec>> kCommands = {
    {"classical",
     {{"w-plus", "0.5", "fraction of positive momenta"},
      {"spread", "1", "momentum spread"},
      {"mass", "1", "particle mass"},
      {"x1", "-1", "start position of particle 1"},
      {"x2", "-1", "start position of particle 2"},
      {"samples", "100000", "Monte Carlo sample count"}}},
    {"wiener",
     {{"D1", "1", "diffusion constant 1"},
      {"D2", "1", "diffusion constant 2"},
      {"L1", "1", "start distance 1"},
      {"L2", "1", "start distance 2"},
      {"samples", "20000", "path samples (0 skips Monte Carlo)"},
      {"horizon", "20", "path-sampler horizon"},
      {"dt", "0.01", "path-sampler step"},
      {"bridge", "true", "Brownian-bridge crossing correction"},
      {"backend", "half-mass", "first-passage density: half-mass | standard (mass 1)"},
      {"tol", "1e-10", "relative quadrature tolerance"}}},
    {"fig-q",
     {{"delta-min", "-4", "first delta"}, {"delta-max", "4", "last delta"}, {"step", "0.1", "delta step"},
      {"tol", "1e-10", "relative quadrature tolerance"}}},
    {"fig-w",
     {{"panel", "delta", "delta: w vs delta at fixed k0/sigma | ratio: w vs k0/sigma at fixed delta"},
      {"ratio", "10", "k0/sigma for the delta panel"},
      {"delta", "1", "delta for the ratio panel"},
      {"x-min", "", "first abscissa (panel default: 0 or 5)"},
      {"x-max", "", "last abscissa (panel default: 5 or 30)"},
      {"step", "", "abscissa step (panel default: 0.01 or 0.05)"}}},
    {"toa",
     {{"k0", "10", "mean momentum"},
      {"sigma", "1", "momentum spread"},
      {"L1", "20", "detector 1 distance"},
      {"L2", "21", "detector 2 distance"},
      {"ell", "0", "path difference of particle 1's superposition (0: plain packet)"},
      {"momentum-points", "4096", "momentum grid points"},
      {"samples", "100000", "Monte Carlo sample count"}}},
    {"detector",
     {{"omega1", "10", "level 1 energy"},
      {"omega2", "14", "level 2 energy"},
      {"lambda1", "0.1", "coupling of transition 0->1"},
      {"lambda2", "0.1", "coupling of transition 0->2"},
      {"m", "0", "field mass"},
      {"k1", "10", "mean momentum of particle 1"},
      {"k2", "14", "mean momentum of particle 2"},
      {"sigma", "0.4", "momentum spread"},
      {"L", "10", "start distance"},
      {"t-max", "60", "last tabulated time"},
      {"t-step", "0.25", "tabulation step"},
      {"horizon", "100", "branching integration horizon"},
      {"oracle", "false", "also run the momentum-grid evolution"},
      {"grid-n", "512", "momentum grid points for the oracle"},
      {"mode", "full", "excitation probability: full | resonant"}}},
    {"verify", {{"criteria", "", "comma-separated criterion ids (default: all)"}}},
};

std::unique_ptr<std::ofstream> open_file(const std::string& path) {
    auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*f) throw ParameterError("cannot open " + path + " for writing");
    return f;
}

// CSV goes to --out or `out`; the JSON summary to --summary, <out>.json, or `err`.
struct Sinks {
    std::unique_ptr<std::ofstream> csv_file, json_file;
    std::ostream* csv = nullptr;
    std::ostream* json = nullptr;

    Sinks(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
        const auto& o = cfg.get("out");
        if (o.empty()) {
            csv = &out;
        } else {
            csv_file = open_file(o);
            csv = csv_file.get();
        }
        std::string s = cfg.get("summary");
        if (s.empty() && !o.empty()) s = o + ".json";
        if (s.empty()) {
            json = &err;
        } else {
            json_file = open_file(s);
            json = json_file.get();
        }
    }
};

std::vector<CausalOrder> two_event_orders() {
    return {two_event::m1(), two_event::m2(), two_event::m3(), two_event::m4()};
}

const char* kOrderNames[4] = {"M1", "M2", "M3", "M4"};

int cmd_classical(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const double w = cfg.number("w-plus");
    const double x1 = cfg.number("x1"), x2 = cfg.number("x2");
    classical::FreeParticleSystem sys(cfg.number("mass"), {x1, x2});
    auto density = classical::density_for_w_plus(sys, w, cfg.number("spread"));
    const auto n = cfg.count("samples");
    require(n >= 1, "samples must be at least 1");
    auto mc = classical::order_probabilities_mc(sys, density, n, cfg.count("seed"));
    // The closed form needs identical start positions.
    const bool symmetric = x1 == x2;
    auto exact = classical::order_probabilities_free_analytic(w);
    Sinks sinks(cfg, out, err);
    Csv csv(*sinks.csv);
    csv.row({"order", "analytic", "mc", "mc_stderr"});
    auto orders = two_event_orders();
    for (int k = 0; k < 4; ++k)
        csv.row({kOrderNames[k], symmetric ? num(exact.probability(orders[k])) : "nan", num(mc.probability(orders[k])),
                 num(mc.std_error(orders[k]).value_or(0.0))});
    return 0;
}

int cmd_wiener(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto& b = cfg.get("backend");
    require(b == "half-mass" || b == "standard", "backend must be half-mass or standard");
    const auto backend = b == "half-mass" ? wiener::DensityBackend::half_mass : wiener::DensityBackend::standard;
    wiener::DiffusionSpec p1{cfg.number("D1"), cfg.number("L1")}, p2{cfg.number("D2"), cfg.number("L2")};
    const double tol = cfg.number("tol");
    require(tol > 0.0, "tol must be positive");
    auto analytic = wiener::order_probabilities_analytic(p1, p2, backend);
    auto quad = wiener::order_probabilities_quadrature(p1, p2, backend, {0.1 * tol, tol, 4000});
    const auto n = cfg.count("samples");
    OrderDistribution mc;
    if (n > 0) {
        wiener::PathSamplerConfig pc{cfg.number("horizon"), cfg.number("dt"), cfg.flag("bridge"), cfg.count("seed")};
        mc = wiener::order_probabilities_mc(p1, p2, pc, n).distribution;
    }
    // The path sampler always follows the full-mass first passage, censored at the horizon.
    nlohmann::json j;
    j["backend"] = b;
    j["mass1"] = quad.mass1;
    j["mass2"] = quad.mass2;
    j["quadrature_error"] = quad.error;
    j["mc_model"] = "Euler-Maruyama paths, standard first passage, no crossing by the horizon counts as not detected";
    j["mc_horizon"] = cfg.number("horizon");
    j["mc_samples"] = n;
    Sinks sinks(cfg, out, err);
    Csv csv(*sinks.csv);
    csv.row({"order", "analytic", "quadrature", "mc", "mc_stderr"});
    auto orders = two_event_orders();
    for (int k = 0; k < 4; ++k)
        csv.row({kOrderNames[k], num(analytic.probability(orders[k])), num(quad.distribution.probability(orders[k])),
                 n > 0 ? num(mc.probability(orders[k])) : "nan",
                 n > 0 ? num(mc.std_error(orders[k]).value_or(0.0)) : "nan"});
    *sinks.json << j.dump(2) << '\n';
    return 0;
}

// Abscissae lo, lo + step, ... up to hi (inclusive within rounding).
std::vector<double> axis(double lo, double hi, double step) {
    require(std::isfinite(lo) && std::isfinite(hi) && std::isfinite(step), "range bounds must be finite");
    require(step > 0.0, "step must be positive");
    require(hi >= lo, "empty range: max is below min");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    require(n <= 10000000, "range has too many points");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = lo + step * static_cast<double>(i);
        if (std::abs(x[i]) < 1e-12 * step) x[i] = 0.0;
    }
    return x;
}

int cmd_fig_q(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto xs = axis(cfg.number("delta-min"), cfg.number("delta-max"), cfg.number("step"));
    const double tol = cfg.number("tol");
    require(tol > 0.0, "tol must be positive");
    numerics::QuadratureSpec qs{1e-3 * tol, tol, 2000};
    Sinks sinks(cfg, out, err);
    Csv csv(*sinks.csv);
    csv.row({"delta", "q1", "q2"});
    for (double d : xs) csv.row({num(d), num(toa::q1(d, qs)), num(toa::q2(d, qs))});
    return 0;
}

int cmd_fig_w(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto& panel = cfg.get("panel");
    require(panel == "delta" || panel == "ratio", "panel must be delta or ratio");
    const bool by_delta = panel == "delta";
    auto pick = [&](const char* key, double fallback) {
        return cfg.get(key).empty() ? fallback : cfg.number(key);
    };
    auto xs = axis(pick("x-min", by_delta ? 0.0 : 5.0), pick("x-max", by_delta ? 5.0 : 30.0),
                   pick("step", by_delta ? 0.01 : 0.05));
    const double ratio = cfg.number("ratio"), delta = cfg.number("delta");
    Sinks sinks(cfg, out, err);
    Csv csv(*sinks.csv);
    csv.row({by_delta ? "delta" : "k0_over_sigma", "w", "p_m1", "p_m2", "flag"});
    bool degenerate = false;
    for (double x : xs) {
        // sigma = 1 fixes the scale; w depends only on (k0/sigma, delta).
        toa::SuperpositionSpec s{{by_delta ? ratio : x, 1.0, 1.0}, by_delta ? x : delta};
        try {
            auto r = toa::asymmetry_superposition(s);
            csv.row({num(x), num(r.w), num(0.5 + r.w), num(0.5 - r.w), "ok"});
        } catch (const NumericalError&) {
            degenerate = true;
            csv.row({num(x), "nan", "nan", "nan", "degenerate"});
        }
    }
    if (degenerate) {
        err << "error: superposition normalization vanishes at flagged rows\n";
        return 3;
    }
    return 0;
}

int cmd_toa(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const double k0 = cfg.number("k0"), sigma = cfg.number("sigma"), ell = cfg.number("ell");
    const auto npts = static_cast<std::size_t>(cfg.count("momentum-points"));
    toa::GaussianWavepacket p1{k0, sigma, cfg.number("L1")}, p2{k0, sigma, cfg.number("L2")};
    const auto a1 = ell == 0.0 ? toa::gaussian_amplitude(p1, npts) : toa::superposition_amplitude({p1, ell}, npts);
    const auto a2 = toa::gaussian_amplitude(p2, npts);
    const auto c1 = toa::toa_curve(a1), c2 = toa::toa_curve(a2);
    const auto n = cfg.count("samples");
    require(n >= 1, "samples must be at least 1");
    auto mc = toa::asymmetry_mc(c1, c2, n, cfg.count("seed"));

    nlohmann::json j;
    j["k0"] = k0;
    j["sigma"] = sigma;
    j["ell"] = ell;
    j["mass1"] = c1.mass;
    j["mass2"] = c2.mass;
    j["w_mc"] = mc.w;
    j["w_mc_stderr"] = mc.std_error;
    if (ell == 0.0) {
        j["w_closed"] = toa::asymmetry_simple(p1, p2).w;
        j["closed_form"] = "q1(sigma (L2 - L1))";
    } else if (p1.L == p2.L) {
        j["w_closed"] = toa::asymmetry_superposition({p1, ell}).w;
        j["closed_form"] = "superposition";
    } else {
        j["w_closed"] = nullptr;
        j["closed_form"] = nullptr;
    }
    j["warnings"] = mc.warnings;

    Sinks sinks(cfg, out, err);
    Csv csv(*sinks.csv);
    csv.row({"t", "p1", "p2"});
    const double lo = std::min(c1.t.front(), c2.t.front()), hi = std::max(c1.t.back(), c2.t.back());
    const double dt = std::min(c1.t[1] - c1.t[0], c2.t[1] - c2.t[0]);
    for (double t : axis(lo, hi, dt)) csv.row({num(t), num(toa::toa_density(a1, t)), num(toa::toa_density(a2, t))});
    *sinks.json << j.dump(2) << '\n';
    return 0;
}

int cmd_detector(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    using namespace detector;
    ThreeLevelSpec spec{cfg.number("omega1"), cfg.number("omega2"), cfg.number("lambda1"), cfg.number("lambda2"),
                        cfg.number("m")};
    IncomingPair pair{cfg.number("k1"), cfg.number("k2"), cfg.number("sigma"), cfg.number("L")};
    const auto& mode_name = cfg.get("mode");
    require(mode_name == "full" || mode_name == "resonant", "mode must be full or resonant");
    const Mode mode = mode_name == "full" ? Mode::full : Mode::resonant;
    const double t_max = cfg.number("t-max");
    auto ts = axis(0.0, t_max, cfg.number("t-step"));
    ClosedForm cf(spec, pair, t_max);

    nlohmann::json j;
    const auto& r = cf.rates();
    j["eta"] = {r.eta[0], r.eta[1]};
    j["gamma"] = {{"11", r(1, 1)}, {"12", r(1, 2)}, {"21", r(2, 1)}, {"22", r(2, 2)}};
    j["arrival_time"] = {arrival_time(spec, pair, 1), arrival_time(spec, pair, 2)};
    j["arrival_time_nonrelativistic"] = {arrival_time_nonrelativistic(spec, pair, 1),
                                         arrival_time_nonrelativistic(spec, pair, 2)};
    j["decay_fit"] = nlohmann::json::array();
    for (int a = 1; a <= 2; ++a) {
        if (r(a, a) <= 0.0) continue;
        ClosedForm long_run(spec, pair, arrival_time(spec, pair, a) + 15.0 / r(a, a));
        auto fit = fit_decay_rate(long_run, a, a);
        j["decay_fit"].push_back(
            {{"level", a}, {"rate", fit.rate}, {"gamma", fit.expected}, {"t_lo", fit.t_lo}, {"t_hi", fit.t_hi}});
    }
    const double horizon = cfg.number("horizon");
    auto b = branching_probabilities(spec, pair, horizon, mode);
    j["branching"] = {{"p_m1", b.distribution.probability(two_event::m1())},
                      {"p_m2", b.distribution.probability(two_event::m2())},
                      {"fired", {b.fired[0], b.fired[1]}},
                      {"horizon", horizon},
                      {"residual", b.residual},
                      {"warnings", b.warnings}};
    if (cfg.flag("oracle")) {
        GridConfig gc;
        gc.n = static_cast<std::size_t>(cfg.count("grid-n"));
        auto traj = grid_evolve(spec, pair, gc, horizon);
        auto ob = branching_from_grid(spec, pair, traj);
        j["oracle"] = {{"p_m1", ob.distribution.probability(two_event::m1())},
                       {"p_m2", ob.distribution.probability(two_event::m2())},
                       {"max_norm_drift", traj.max_drift},
                       {"dt", traj.dt},
                       {"grid_points", gc.n}};
    }

    Sinks sinks(cfg, out, err);
    Csv csv(*sinks.csv);
    csv.row({"t", "abs_F11_sq", "abs_F22_sq", "p1", "p2"});
    for (double t : ts)
        csv.row({num(t), num(std::norm(cf.f(1, 1, t))), num(std::norm(cf.f(2, 2, t))), num(cf.p_excited(1, t, mode)),
                 num(cf.p_excited(2, t, mode))});
    *sinks.json << j.dump(2) << '\n';
    return 0;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    acceptance::Options opts;
    opts.seed = cfg.count("seed");
    std::stringstream ids(cfg.get("criteria"));
    for (std::string tok; std::getline(ids, tok, ',');) {
        tok = trim(tok);
        if (tok.empty()) continue;
        RunConfig one;
        one.set("id", tok);
        opts.only.push_back(static_cast<int>(one.count("id")));
    }
    for (int id : opts.only) require(id >= 1 && id <= acceptance::kCriteria, "unknown criterion " + std::to_string(id));
    Sinks sinks(cfg, out, err);
    const bool ok = acceptance::report(opts, *sinks.csv);
    return ok ? 0 : 1;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    require(!key.empty() && trim(key) == key && key.find_first_of("=#\n") == std::string::npos,
            "invalid config key '" + key + "'");
    require(trim(value) == value && value.find('\n') == std::string::npos,
            "config value for '" + key + "' has surrounding whitespace or a newline");
    values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ParameterError("missing config key '" + key + "'");
    return it->second;
}

double RunConfig::number(const std::string& key) const {
    const auto& v = get(key);
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (v.empty() || used != v.size() || !std::isfinite(x)) throw ParameterError(key + ": '" + v + "' is not a number");
    return x;
}

std::uint64_t RunConfig::count(const std::string& key) const {
    const auto& v = get(key);
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (v.empty() || used != v.size() || v[0] == '-')
        throw ParameterError(key + ": '" + v + "' is not a non-negative integer");
    return x;
}

bool RunConfig::flag(const std::string& key) const {
    const auto& v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParameterError(key + ": '" + v + "' is not a boolean");
}

std::string RunConfig::serialize() const {
    std::string s;
    for (const auto& [k, v] : values_) s += k + " = " + v + "\n";
    return s;
}

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
        c.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParameterError("cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

std::vector<std::string> subcommands() {
    return {"classical", "wiener", "fig-q", "fig-w", "toa", "detector", "verify"};
}

std::vector<KeySpec> subcommand_keys(const std::string& subcommand) {
    auto it = kCommands.find(subcommand);
    require(it != kCommands.end(), "unknown subcommand " + subcommand);
    std::vector<KeySpec> keys = it->second;
    for (const auto& k : kCommon) {
        bool overridden = false;
        for (const auto& own : it->second) overridden |= own.name == k.name;
        if (!overridden) keys.push_back(k);
    }
    return keys;
}

int run_config(const std::string& subcommand, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (subcommand == "classical") return cmd_classical(cfg, out, err);
        if (subcommand == "wiener") return cmd_wiener(cfg, out, err);
        if (subcommand == "fig-q") return cmd_fig_q(cfg, out, err);
        if (subcommand == "fig-w") return cmd_fig_w(cfg, out, err);
        if (subcommand == "toa") return cmd_toa(cfg, out, err);
        if (subcommand == "detector") return cmd_detector(cfg, out, err);
        if (subcommand == "verify") return cmd_verify(cfg, out, err);
        throw ParameterError("unknown subcommand " + subcommand);
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Causal-order probabilities: classical flows, Brownian first passage, quantum arrival times "
                 "and a three-level detector"};
    app.name("causalorder");
    app.require_subcommand(1);

    struct Bound {
        CLI::App* app;
        std::map<std::string, std::string> values;
        std::string config_path;
        bool print_config = false;
    };
    std::map<std::string, std::unique_ptr<Bound>> bound;
    for (const auto& name : subcommands()) {
        auto b = std::make_unique<Bound>();
        b->app = app.add_subcommand(name, "");
        for (const auto& k : subcommand_keys(name))
            b->app->add_option("--" + k.name, b->values[k.name],
                               k.help + (k.default_value.empty() ? "" : " [" + k.default_value + "]"));
        b->app->add_option("--config", b->config_path, "read key = value settings from a file");
        b->app->add_flag("--print-config", b->print_config, "print the merged settings and exit");
        bound[name] = std::move(b);
    }
    bound["classical"]->app->description("order probabilities of two free particles");
    bound["wiener"]->app->description("first-passage order probabilities of two Brownian particles");
    bound["fig-q"]->app->description("tabulate q1 and q2");
    bound["fig-w"]->app->description("tabulate the superposition asymmetry w");
    bound["toa"]->app->description("arrival-time densities and sampled order asymmetry");
    bound["detector"]->app->description("three-level detector: |F|^2, p_a(t), fits and branching");
    bound["verify"]->app->description("run the acceptance criteria");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    for (const auto& [name, b] : bound) {
        if (!b->app->parsed()) continue;
        try {
            RunConfig cfg;
            const auto keys = subcommand_keys(name);
            for (const auto& k : keys)
                if (!k.default_value.empty()) cfg.set(k.name, k.default_value);
                else cfg.set(k.name, "");
            if (!b->config_path.empty()) {
                const auto file = RunConfig::load(b->config_path);
                for (const auto& [k, v] : file.values()) {
                    require(cfg.has(k), "config file key '" + k + "' is not used by " + name);
                    cfg.set(k, v);
                }
            }
            for (const auto& k : keys)
                if (b->app->get_option("--" + k.name)->count() > 0) cfg.set(k.name, trim(b->values[k.name]));
            if (b->print_config) {
                out << cfg.serialize();
                return 0;
            }
            return run_config(name, cfg, out, err);
        } catch (const ParameterError& e) {
            err << "error: " << e.what() << '\n';
            return 2;
        }
    }
    return 2;
}

}  // namespace causal::cli
