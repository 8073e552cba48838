#include "heatflow/experiments.hpp"

#include "heatflow/errors.hpp"
#include "heatflow/moment2.hpp"
#include "heatflow/observables.hpp"
#include "heatflow/rootdyn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <limits>
#include <set>

namespace heatflow {

using nlohmann::json;

namespace {

const std::set<std::string> kExperiments = {"flow", "deformation", "moments", "hermite", "beyond", "pde-residual"};

cplx parse_cplx(const json& j, const std::string& what) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ConfigInvalid(what + " must be a number or [re, im]");
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigInvalid(std::string("field '") + key + "': " + e.what());
    }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ConfigInvalid("unknown field '" + it.key() + "' in " + where);
}

InitialSpectrum parse_initial(const json& j, int N) {
    if (!j.is_object()) throw ConfigInvalid("model.initial must be an object");
    reject_unknown(j, {"zero", "haar_unitary", "values", "linspace"}, "model.initial");
    int active = 0;
    InitialSpectrum out;
    if (get_or(j, "zero", false)) {
        ++active;
        out = InitialSpectrum::zero();
    }
    if (get_or(j, "haar_unitary", false)) {
        ++active;
        out = InitialSpectrum::haar_unitary();
    }
    if (j.contains("values")) {
        ++active;
        std::vector<cplx> v;
        for (const auto& x : j.at("values")) v.push_back(parse_cplx(x, "model.initial.values[]"));
        out = InitialSpectrum::from_values(std::move(v));
    }
    if (j.contains("linspace")) {
        ++active;
        const auto& ls = j.at("linspace");
        if (!ls.is_array() || ls.size() != 2) throw ConfigInvalid("model.initial.linspace must be [a, b]");
        const double a = ls[0].get<double>(), b = ls[1].get<double>();
        std::vector<cplx> v;
        for (int i = 0; i < N; ++i) v.emplace_back(N == 1 ? a : a + (b - a) * i / (N - 1.0), 0.0);
        out = InitialSpectrum::from_values(std::move(v));
    }
    if (active != 1) throw ConfigInvalid("model.initial needs exactly one of zero, haar_unitary, values, linspace");
    return out;
}

// Pearson chi-square per degree of freedom of a histogram against a CDF.
// Expected counts are floored at 1/2 so bins outside the support stay finite.
double histogram_chi2(const Histogram& h, const std::function<double(double)>& cdf) {
    double n = 0.0;
    for (auto c : h.counts) n += static_cast<double>(c);
    double chi2 = 0.0;
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        const double expected = std::max(0.5, n * (cdf(h.edges[b + 1]) - cdf(h.edges[b])));
        const double d = static_cast<double>(h.counts[b]) - expected;
        chi2 += d * d / expected;
    }
    return chi2 / static_cast<double>(h.counts.size() - 1);
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

class Runner {
public:
    explicit Runner(const ExperimentConfig& c) : cfg(c), dir(c.outputs) {}

    template <class F>
    auto stage(const std::string& name, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        auto finish = [&] {
            m.stages.push_back({name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
        };
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            finish();
        } else {
            auto r = f();
            finish();
            return r;
        }
    }

    void emit(const std::string& name, const std::string& content) { m.files.push_back(write_artifact(dir, name, content)); }

    ModelSpec spec_at(cplx tau) const {
        ModelSpec s = cfg.model;
        s.params.tau = tau;
        s.seed = cfg.seed;
        return s;
    }

    PointSet sample_start() {
        return stage("sample", [&] {
            const ModelSpec s = spec_at(cfg.tau0);
            Rng rng(s.seed, 0);
            return eigenvalues(build_model_matrix(s, rng));
        });
    }

    void flow();
    void deformation();
    void moments_run();
    void hermite_run();
    void pde();

    const ExperimentConfig& cfg;
    std::filesystem::path dir;
    RunManifest m;
};

void Runner::flow() {
    const auto& opt = cfg.options;
    const int N = cfg.model.N;
    const Mode mode = cfg.model.kind;
    const PointSet start = sample_start();
    emit("start.csv", points_csv(start));

    const std::string method = get_or<std::string>(opt, "method", "ode");
    TrajectoryBundle bundle;
    if (method == "ode") {
        IntegrationOpts io;
        io.t_samples = cfg.t_samples;
        io.cross_validate = get_or(opt, "cross_validate", false);
        io.stop_at_collision = get_or(opt, "stop_at_collision", false);
        io.precision_bits = cfg.precision_bits;
        bundle = stage("integrate", [&] { return integrate_trajectories(start, N, cfg.tau0, cfg.tau, mode, io); });
        if (!std::isnan(bundle.endpoint_check)) m.metrics["endpoint_check"] = bundle.endpoint_check;
    } else if (method == "coefficient") {
        bundle = stage("continue", [&] {
            return continue_roots(start, N, cfg.tau0, cfg.tau, mode, cfg.t_samples, cfg.precision_bits);
        });
    } else {
        throw ConfigInvalid("options.method must be ode or coefficient");
    }
    emit("trajectories.csv", to_csv(bundle));
    emit("collisions.json", collisions_json(bundle));
    const PointSet end = bundle.endpoints();
    emit("endpoints.csv", points_csv(end));
    const int bins = get_or(opt, "bins", 40);
    emit("hist_re.csv", emit_histogram(end, HistAxis::re, bins).to_csv());
    emit("hist_im.csv", emit_histogram(end, HistAxis::im, bins).to_csv());
    m.metrics["collisions"] = static_cast<double>(bundle.collisions.size());
    m.metrics["truncated"] = bundle.truncated ? 1.0 : 0.0;

    if (get_or(opt, "circle_check", false)) {
        // |z| grows by exp(Re dtau / (2N)) along a multiplicative flow from the unit circle
        double defect = 0.0;
        for (std::size_t s = 0; s < bundle.sample_count(); ++s) {
            const double scale = std::exp(-(bundle.tau_samples[s] - cfg.tau0).real() / (2.0 * N));
            for (const auto& path : bundle.paths) defect = std::max(defect, std::abs(std::abs(path[s]) * scale - 1.0));
        }
        m.metrics["circle_defect"] = defect;
    }

    std::vector<double> abs_im;
    for (cplx z : end) abs_im.push_back(std::abs(z.imag()));
    m.metrics["median_abs_im"] = median(abs_im);

    std::string ref = get_or<std::string>(opt, "reference", "");
    if (ref.empty() && cfg.experiment == "beyond") {
        char buf[64];
        std::snprintf(buf, sizeof buf, "semicircle(%.17g)", cfg.model.params.s - cfg.tau.real());
        ref = buf;
    }
    if (!ref.empty()) {
        stage("compare", [&] {
            const ReferenceLaw law = ReferenceLaw::parse(ref);
            Rng rng(cfg.seed, 0x5eedULL);
            const PointSet sample = reference_sampler(law, get_or<std::size_t>(opt, "reference_samples", 4096), rng);
            const auto d = distribution_distance({end}, {sample});
            m.metrics["energy_distance"] = d.energy;
            m.metrics["ks_im"] = d.ks_im;
            m.metrics["ks_abs"] = d.ks_abs;
            if (law.kind == ReferenceLaw::Kind::semicircle) {
                auto cdf = [s = law.s](double x) { return semicircle_cdf(x, s); };
                m.metrics["ks_re"] = ks_against(real_parts(end), cdf);
                m.metrics["chi2_re"] = histogram_chi2(emit_histogram(end, HistAxis::re, bins), cdf);
            } else
                m.metrics["ks_re"] = d.ks_re;
        });
    }

    const std::string chord = get_or<std::string>(opt, "chord", "");
    if (!chord.empty()) {
        if (chord != "conjugate" && chord != "linear") throw ConfigInvalid("options.chord must be conjugate or linear");
        const double diam = start.diameter();
        std::vector<double> dev;
        for (const auto& path : bundle.paths) {
            double worst = 0.0;
            for (std::size_t s = 0; s < path.size(); ++s) {
                const double t = bundle.t[s];
                const cplx target = chord == "conjugate" ? path[0] + t * std::conj(path[0])
                                                         : path[0] + t * (path.back() - path[0]);
                worst = std::max(worst, std::abs(path[s] - target));
            }
            dev.push_back(worst);
        }
        m.metrics["straightness"] = median(dev) / diam;
    }

    if (opt.contains("real_root_tol")) {
        const double tol = get_or(opt, "real_root_tol", 1e-8);
        stage("real_roots", [&] {
            const mp::Precision prec = cfg.precision_bits > 0 ? cfg.precision_bits : default_precision(N);
            const Poly q = apply_heat(from_roots(start, prec), HeatStep{cfg.tau - cfg.tau0, N, mode});
            const int count = real_root_count(q, tol);
            m.metrics["real_root_count"] = count;
            m.metrics["real_root_fraction"] = static_cast<double>(count) / static_cast<double>(start.size());
        });
    }
}

void Runner::deformation() {
    const auto& opt = cfg.options;
    if (cfg.mc_samples < 100) throw ConfigInvalid("deformation needs mc_samples >= 100");
    const ModelSpec at_tau = spec_at(cfg.tau);
    const ModelSpec at_tau0 = spec_at(cfg.tau0);
    std::vector<cplx> grid;
    if (opt.contains("grid")) {
        for (const auto& z : opt.at("grid")) grid.push_back(parse_cplx(z, "options.grid[]"));
    } else {
        grid = default_grid(at_tau);
    }
    McOpts mc;
    mc.threads = cfg.threads;
    mc.precision_bits = cfg.precision_bits;
    const double threshold = get_or(opt, "z_threshold", 4.0);
    const double fraction = get_or(opt, "required_fraction", 0.85);

    const auto lhs = stage("direct", [&] { return estimate_D_direct(at_tau, grid, cfg.mc_samples, mc); });
    const auto rhs = stage("heatflow", [&] { return estimate_D_heatflow(at_tau0, cfg.tau, grid, cfg.mc_samples, mc); });
    const auto verdict = verify_deformation(lhs, rhs, threshold, fraction);
    emit("direct.json", lhs.to_json());
    emit("heatflow.json", rhs.to_json());
    emit("verdict.csv", verdict.to_csv());
    m.metrics["pass_fraction"] = verdict.pass_fraction;
    double zmax = 0.0;
    for (const auto& r : verdict.rows) zmax = std::max(zmax, r.z_score);
    m.metrics["max_z_score"] = zmax;

    if (get_or(opt, "control", false)) {
        const auto ctl = stage("control", [&] {
            return estimate_D_heatflow(at_tau0, std::conj(cfg.tau), grid, cfg.mc_samples, mc);
        });
        const auto cv = verify_deformation(lhs, ctl, threshold, fraction);
        emit("control_heatflow.json", ctl.to_json());
        emit("control_verdict.csv", cv.to_csv());
        m.metrics["control_pass_fraction"] = cv.pass_fraction;
    }
}

void Runner::moments_run() {
    const int N = cfg.model.N;
    const int K = get_or(cfg.options, "K", 6);
    const PointSet start = sample_start();
    IntegrationOpts io;
    io.t_samples = cfg.t_samples;
    io.rel_tol = get_or(cfg.options, "rel_tol", 1e-11);
    io.abs_tol = get_or(cfg.options, "abs_tol", 1e-13);
    const auto bundle = stage("integrate", [&] {
        return integrate_trajectories(start, N, cfg.tau0, cfg.tau, Mode::additive, io);
    });
    const MomentVector m0 = moments(start, K);
    double m1_drift = 0.0, m2_err = 0.0, ode_err = 0.0;
    std::string csv = "t,k,traj_re,traj_im,ode_re,ode_im\n";
    char buf[160];
    for (std::size_t s = 0; s < bundle.sample_count(); ++s) {
        const MomentVector traj = moments(bundle.at(s), K);
        const MomentVector ode = evolve_moments(m0, N, cfg.tau0, bundle.tau_samples[s]);
        if (K >= 1) m1_drift = std::max(m1_drift, std::abs(traj.m[1] - m0.m[1]));
        if (K >= 2) {
            const cplx closed = m0.m[2] - (bundle.tau_samples[s] - cfg.tau0) * (1.0 - 1.0 / N);
            m2_err = std::max(m2_err, std::abs(traj.m[2] - closed));
        }
        for (int k = 0; k <= K; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            ode_err = std::max(ode_err, std::abs(traj.m[uk] - ode.m[uk]) / std::max(1.0, std::abs(ode.m[uk])));
            std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", bundle.t[s], k, traj.m[uk].real(),
                          traj.m[uk].imag(), ode.m[uk].real(), ode.m[uk].imag());
            csv += buf;
        }
    }
    emit("moments.csv", csv);
    emit("moments_start.json", moments_json(m0));
    m.metrics["m1_drift"] = m1_drift;
    m.metrics["m2_error"] = m2_err;
    m.metrics["moment_ode_error"] = ode_err;
    m.metrics["collisions"] = static_cast<double>(bundle.collisions.size());
}

void Runner::hermite_run() {
    const int N = cfg.model.N;
    const mp::Precision prec = cfg.precision_bits > 0 ? cfg.precision_bits : default_precision(N);
    const Poly H = hermite(N, prec);
    emit("hermite.poly", to_text(H));
    const Poly forward = heat_additive(H, HeatStep{cplx(1.0, 0.0), N, Mode::additive});
    m.metrics["inversion_error"] = relative_coeff_error(forward, Poly::monomial(N, prec));
    const auto rr = stage("roots", [&] { return find_roots(H); });
    emit("hermite_roots.csv", points_csv(rr.points));
    int real = 0;
    for (cplx z : rr.points) real += std::abs(z.imag()) <= get_or(cfg.options, "real_root_tol", 1e-8) * (1.0 + std::abs(z.real()));
    m.metrics["real_root_count"] = real;
    m.metrics["real_root_deficit"] = N - real;
    m.metrics["ks_re"] = ks_against(real_parts(rr.points), [](double x) { return semicircle_cdf(x, 1.0); });
}

void Runner::pde() {
    const auto& opt = cfg.options;
    if (cfg.mc_samples < 100) throw ConfigInvalid("pde-residual needs mc_samples >= 100");
    const ModelSpec spec = spec_at(cfg.tau0);
    const cplx z0 = opt.contains("z0") ? parse_cplx(opt.at("z0"), "options.z0") : cplx(0.3, 0.1);
    McOpts mc;
    mc.threads = cfg.threads;
    const auto r = stage("residual", [&] {
        return pde_residual_check(spec, z0, get_or(opt, "h_tau", 1e-2), get_or(opt, "h_z", 1e-2), cfg.mc_samples, mc);
    });
    const double se = std::hypot(r.se_re, r.se_im);
    json j = {{"z0", cplx_json(z0)},        {"d_dtau", cplx_json(r.d_dtau)}, {"spatial", cplx_json(r.spatial)},
              {"residual", cplx_json(r.residual)}, {"se_re", r.se_re}, {"se_im", r.se_im},
              {"D", r.D},                   {"M", r.M},                     {"pass", r.pass}};
    emit("pde_residual.json", j.dump(2) + "\n");
    m.metrics["residual_abs"] = std::abs(r.residual);
    m.metrics["residual_se"] = se;
    m.metrics["residual_z"] = se > 0.0 ? std::abs(r.residual) / se : 0.0;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigInvalid("config must be a JSON object");
    reject_unknown(doc,
                   {"experiment", "model", "tau0", "tau", "t_samples", "outputs", "seed", "precision_bits",
                    "mc_samples", "threads", "thresholds", "options"},
                   "config");
    ExperimentConfig c;
    c.source = doc;
    c.experiment = get_or<std::string>(doc, "experiment", "");
    if (!kExperiments.count(c.experiment)) throw ConfigInvalid("unknown experiment '" + c.experiment + "'");

    const json model = doc.contains("model") ? doc.at("model") : json::object();
    reject_unknown(model, {"kind", "N", "s", "allow_extended", "initial", "brownian_steps", "scheme"}, "model");
    try {
        c.model.kind = mode_from_string(get_or<std::string>(model, "kind", "additive"));
    } catch (const Error& e) {
        throw ConfigInvalid(e.what());
    }
    c.model.N = get_or(model, "N", 8);
    if (c.model.N < 1) throw ConfigInvalid("model.N must be positive");
    c.model.params.s = get_or(model, "s", 1.0);
    c.model.params.allow_extended = get_or(model, "allow_extended", false);
    c.model.brownian_steps = get_or(model, "brownian_steps", 0);
    const std::string scheme = get_or<std::string>(model, "scheme", "euler");
    if (scheme == "euler") c.model.scheme = BrownianScheme::euler;
    else if (scheme == "exact_unitary") c.model.scheme = BrownianScheme::exact_unitary;
    else throw ConfigInvalid("model.scheme must be euler or exact_unitary");
    c.model.initial = model.contains("initial") ? parse_initial(model.at("initial"), c.model.N) : InitialSpectrum::zero();
    if (c.model.kind == Mode::multiplicative && !model.contains("initial"))
        c.model.initial = InitialSpectrum::from_values(std::vector<cplx>(static_cast<std::size_t>(c.model.N), 1.0));

    if (doc.contains("tau0")) c.tau0 = parse_cplx(doc.at("tau0"), "tau0");
    if (doc.contains("tau")) c.tau = parse_cplx(doc.at("tau"), "tau");
    c.t_samples = get_or(doc, "t_samples", 11);
    if (c.t_samples < 2) throw ConfigInvalid("t_samples must be at least 2");
    c.outputs = get_or<std::string>(doc, "outputs", "out/" + c.experiment);
    if (c.outputs.empty()) throw ConfigInvalid("outputs must be a path");
    c.seed = get_or<std::uint64_t>(doc, "seed", 1);
    c.precision_bits = get_or<long>(doc, "precision_bits", 0);
    if (c.precision_bits != 0 && c.precision_bits < 64) throw ConfigInvalid("precision_bits must be 0 or >= 64");
    const long long mc = get_or<long long>(doc, "mc_samples", 0);
    if (mc < 0) throw ConfigInvalid("mc_samples must be nonnegative");
    c.mc_samples = static_cast<std::size_t>(mc);
    c.threads = get_or(doc, "threads", 1);
    if (c.threads < 1) throw ConfigInvalid("threads must be positive");
    if (doc.contains("thresholds")) {
        const auto& th = doc.at("thresholds");
        if (!th.is_object()) throw ConfigInvalid("thresholds must be an object");
        for (auto it = th.begin(); it != th.end(); ++it) {
            const std::string& k = it.key();
            const bool suffix_ok = k.size() > 4 && (k.ends_with("_max") || k.ends_with("_min"));
            if (!suffix_ok) throw ConfigInvalid("threshold '" + k + "' must end in _max or _min");
            if (!it.value().is_number()) throw ConfigInvalid("threshold '" + k + "' must be a number");
            c.thresholds[k] = it.value().get<double>();
        }
    }
    if (doc.contains("options")) {
        if (!doc.at("options").is_object()) throw ConfigInvalid("options must be an object");
        c.options = doc.at("options");
    }
    // the sampled model sits at tau0
    c.model.params.tau = c.tau0;
    c.model.seed = c.seed;
    try {
        c.model.validate();
    } catch (const Error& e) {
        throw ConfigInvalid(std::string("model: ") + e.what());
    }
    return c;
}

ExperimentConfig parse_config_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigInvalid(std::string("not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json default_config(std::string_view experiment) {
    json j = {{"experiment", std::string(experiment)}};
    if (experiment == "deformation" || experiment == "pde-residual") {
        j["model"] = {{"N", 2}, {"s", 1.0}};
        j["mc_samples"] = 20000;
    }
    if (experiment == "hermite") j["model"] = {{"N", 60}};
    if (experiment == "beyond") {
        j["tau"] = -1.0;
        j["model"] = {{"N", 64}, {"allow_extended", true}};
    }
    return j;
}

json RunManifest::to_json() const {
    json j;
    j["config"] = config;
    j["version"] = version;
    j["wall_seconds"] = wall_seconds;
    auto st = json::array();
    for (const auto& s : stages) st.push_back({{"name", s.name}, {"seconds", s.seconds}});
    j["stages"] = st;
    auto fl = json::array();
    for (const auto& f : files) fl.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    j["files"] = fl;
    j["metrics"] = json::object();
    for (const auto& [k, v] : metrics) j["metrics"][k] = v;
    auto ck = json::array();
    for (const auto& c : checks)
        ck.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"relation", c.relation}, {"pass", c.pass}});
    j["thresholds"] = ck;
    j["passed"] = passed;
    if (!error.empty()) j["error"] = error;
    return j;
}

RunManifest run(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    Runner r(config);
    r.m.config = config.source;
    try {
        if (config.experiment == "flow" || config.experiment == "beyond") r.flow();
        else if (config.experiment == "deformation") r.deformation();
        else if (config.experiment == "moments") r.moments_run();
        else if (config.experiment == "hermite") r.hermite_run();
        else if (config.experiment == "pde-residual") r.pde();
        else throw ConfigInvalid("unknown experiment '" + config.experiment + "'");
    } catch (const std::exception& e) {
        r.m.error = e.what();
    }

    bool ok = r.m.error.empty();
    for (const auto& [name, threshold] : config.thresholds) {
        Check c;
        c.name = name;
        c.threshold = threshold;
        c.relation = name.ends_with("_max") ? "le" : "ge";
        const std::string metric = name.substr(0, name.size() - 4);
        const auto it = r.m.metrics.find(metric);
        c.value = it == r.m.metrics.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
        c.pass = c.relation == "le" ? c.value <= threshold : c.value >= threshold;
        ok = ok && c.pass;
        r.m.checks.push_back(c);
    }
    r.m.passed = ok;
    r.m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::filesystem::create_directories(r.dir);
    const std::string text = r.m.to_json().dump(2) + "\n";
    std::ofstream(r.dir / "manifest.json", std::ios::binary | std::ios::trunc) << text;
    return r.m;
}

int real_root_count(const Poly& p, double tol) {
    if (p.degree() < 1) return 0;
    // compared in log2 so huge coefficients do not overflow
    double max_abs = -INFINITY, worst_im = -INFINITY;
    for (const auto& c : p.coeffs) {
        max_abs = std::max(max_abs, mp::log2_abs(c));
        long exp2 = 0;
        const double mant = mpfr_get_d_2exp(&exp2, c.im.raw(), MPFR_RNDN);
        if (mant != 0.0) worst_im = std::max(worst_im, std::log2(std::abs(mant)) + static_cast<double>(exp2));
    }
    if (worst_im > max_abs + std::log2(tol)) throw InvalidArgument("polynomial coefficients are not real within tolerance");
    const PointSet z = roots(p);
    int count = 0;
    for (cplx w : z) count += std::abs(w.imag()) <= tol * (1.0 + std::abs(w.real()));
    return count;
}

}  // namespace heatflow
