// dgct: simulate datasets, reconstruct sinograms, run benchmark tables.
//
// Exit codes: 0 success, 2 usage, 3 data error, 4 numerical failure.

#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <dgct/experiment.hpp>
#include <dgct/png.hpp>

using namespace dgct;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Every option is reachable from the command line and from a JSON config
/// file; command-line values win, then the file, then built-in defaults.
class Options {
public:
    explicit Options(CLI::App* app) : app_(app)
    {
        app_->add_option("--config", config_path_, "JSON config file (flags override its values)");
    }

    template <class T>
    CLI::Option* add(const std::string& key, T& var, const std::string& help)
    {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        CLI::Option* opt = app_->add_option(flag, var, help)->capture_default_str();
        entries_.push_back({key, opt, [&var, key](const json& j) {
                                try {
                                    var = j.get<T>();
                                } catch (const json::exception&) {
                                    throw UsageError("config key '" + key + "' has the wrong type");
                                }
                            },
                            [&var] { return json(var); }});
        return opt;
    }

    CLI::Option* flag(const std::string& key, bool& var, const std::string& help)
    {
        std::string f = "--" + key;
        std::replace(f.begin(), f.end(), '_', '-');
        CLI::Option* opt = app_->add_flag(f, var, help);
        entries_.push_back({key, opt, [&var, key](const json& j) {
                                if (!j.is_boolean())
                                    throw UsageError("config key '" + key + "' must be a boolean");
                                var = j.get<bool>();
                            },
                            [&var] { return json(var); }});
        return opt;
    }

    /// Fills options not given on the command line from the config file.
    void resolve()
    {
        if (config_path_.empty())
            return;
        json file;
        try {
            file = read_json(config_path_);
        } catch (const IoError& e) {
            throw UsageError(e.what());
        }
        if (!file.is_object())
            throw UsageError("config file must hold a JSON object");
        std::set<std::string> known;
        for (auto& e : entries_) {
            known.insert(e.key);
            if (e.opt->count() == 0 && file.contains(e.key))
                e.from_json(file[e.key]);
        }
        for (auto it = file.begin(); it != file.end(); ++it)
            if (!known.count(it.key()))
                throw UsageError("unknown config key '" + it.key() + "'");
    }

    json effective() const
    {
        json j = json::object();
        for (const auto& e : entries_)
            j[e.key] = e.to_json();
        return j;
    }

private:
    struct Entry {
        std::string key;
        CLI::Option* opt;
        std::function<void(const json&)> from_json;
        std::function<json()> to_json;
    };
    CLI::App* app_;
    std::string config_path_;
    std::vector<Entry> entries_;
};

// Regularisation weights tuned on 64x64 phantoms, 30 views over 180 degrees, nu = 0.01.
double default_lambda(const std::string& method)
{
    if (method == "tv-sgp")
        return 2.0;
    if (method == "wavelet-fista")
        return 2.0;
    if (method == "tpv-cp")
        return 1.0;
    return 0.0;
}

void require_method(const std::string& m)
{
    const auto& known = known_methods();
    if (std::find(known.begin(), known.end(), m) == known.end())
        throw UsageError("unknown method '" + m + "' (fbp, tv-sgp, wavelet-fista, tpv-cp)");
}

MbirModel model_from(const std::string& s)
{
    if (s == "tv")
        return MbirModel::tv;
    if (s == "tpv")
        return MbirModel::tpv;
    throw UsageError("model must be tv or tpv");
}

RampWindow window_from(const std::string& s)
{
    if (s == "ramlak")
        return RampWindow::ramlak;
    if (s == "hann")
        return RampWindow::hann;
    throw UsageError("window must be ramlak or hann");
}

// The output location is not part of what a run computes.
std::string run_hash(json effective)
{
    effective.erase("out");
    return config_hash(effective);
}

json report_json(const SolverReport& r)
{
    json j = report_to_json(r);
    j["objective_trace"] = r.objective_trace;
    j["iterate_distance_trace"] = r.iterate_distance_trace;
    if (!r.outer_objective_trace.empty())
        j["outer_objective_trace"] = r.outer_objective_trace;
    if (!r.armijo_step.empty())
        j["line_search_failures"] = r.line_search_failures;
    return j;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    int n = 20, side = 64, angles = 30, n_test = -1, K = 10, rising_max_iters = 5000;
    double range = 180, nu = 0.01, coarse_lambda = 2.0, beta = 1e-3, rising_lambda = -1, rising_p = 0.5,
           rising_tol = 1e-5;
    std::uint64_t seed = 0;
    std::string out, rising_targets = "none", dataset_id;
    bool png = false;
};

void register_simulate(Options& o, SimulateArgs& a)
{
    o.add("n", a.n, "number of phantoms");
    o.add("side", a.side, "image side N");
    o.add("angles", a.angles, "number of views");
    o.add("range", a.range, "angular range in degrees");
    o.add("nu", a.nu, "relative noise level");
    o.add("seed", a.seed, "base seed; item i uses seed + i");
    o.add("n_test", a.n_test, "items in the test split (default n / 10)");
    o.add("K", a.K, "SGP iterations for the TV-K coarse input");
    o.add("coarse_lambda", a.coarse_lambda, "mu of the TV-K coarse solver");
    o.add("beta", a.beta, "TV smoothing of the SGP solvers");
    o.add("rising_targets", a.rising_targets, "convergent targets: none, tv or tpv");
    o.add("rising_lambda", a.rising_lambda, "weight of the target solver (default per method)");
    o.add("rising_p", a.rising_p, "TpV exponent of the target solver");
    o.add("rising_tol", a.rising_tol, "tolerance of the target solver");
    o.add("rising_max_iters", a.rising_max_iters, "iteration cap of the target solver");
    o.add("out", a.out, "dataset root directory");
    o.add("dataset_id", a.dataset_id, "identifier stored in the manifest (default: out directory name)");
    o.flag("png", a.png, "also write 16-bit PNG previews of the ground truths");
}

int run_simulate(SimulateArgs a, json effective)
{
    if (a.out.empty())
        throw UsageError("simulate: --out is required");
    if (a.n < 1)
        throw UsageError("simulate: --n must be >= 1");
    DatasetOptions opt;
    opt.dataset_id = a.dataset_id.empty() ? fs::path(a.out).filename().string() : a.dataset_id;
    if (opt.dataset_id.empty())
        opt.dataset_id = fs::path(a.out).parent_path().filename().string();
    effective["dataset_id"] = opt.dataset_id;
    opt.count = a.n;
    const int n_test = a.n_test >= 0 ? a.n_test : a.n / 10;
    if (n_test > a.n)
        throw UsageError("simulate: --n-test exceeds --n");
    opt.n_train = a.n - n_test;
    opt.geometry = build_geometry(a.side, a.angles, a.range);
    opt.nu = a.nu;
    opt.base_seed = a.seed;
    opt.K = a.K;
    opt.coarse_cfg.lambda = a.coarse_lambda;
    opt.coarse_cfg.beta = a.beta;
    opt.rising = rising_from_string(a.rising_targets);
    if (opt.rising != RisingTargets::none) {
        const std::string method = opt.rising == RisingTargets::tv ? "tv-sgp" : "tpv-cp";
        opt.rising_cfg.lambda = a.rising_lambda >= 0 ? a.rising_lambda : default_lambda(method);
        opt.rising_cfg.p = a.rising_p;
        opt.rising_cfg.beta = a.beta;
        opt.rising_cfg.tol = a.rising_tol;
        opt.rising_cfg.max_total_iters = a.rising_max_iters;
    }
    const json m = build_dataset(a.out, opt);
    if (a.png)
        for (const auto& item : m["items"]) {
            const fs::path p = fs::path(a.out) / item["gt"].get<std::string>();
            write_png16(fs::path(p).replace_extension(".png"), load_image(p));
        }
    write_json(fs::path(a.out) / "effective_config.json", effective);
    std::printf("wrote %d items (%d train, %d test) to %s\n", a.n, opt.n_train, n_test, a.out.c_str());
    return 0;
}

// ------------------------------------------------------------- reconstruct

struct SolverArgs {
    double p = 0.5, lambda = -1, eta = 0, beta = 1e-3, tol = 1e-4, step_ratio = 100, coarse_lambda = 2.0;
    int max_iters = 500, inner_iters = 10, levels = 3, K = 10;
    std::string window = "ramlak", init_model = "tv";
};

void register_solver(Options& o, SolverArgs& s)
{
    o.add("p", s.p, "TpV exponent (tpv-cp)");
    o.add("lambda", s.lambda, "regularisation weight (default per method)");
    o.add("eta", s.eta, "IRL1 smoothing; 0 = relative to the iterate range");
    o.add("beta", s.beta, "TV smoothing (tv-sgp)");
    o.add("tol", s.tol, "relative stopping tolerance on successive iterates");
    o.add("max_iters", s.max_iters, "iteration budget (CP iterations summed over reweights for tpv-cp)");
    o.add("inner_iters", s.inner_iters, "CP iterations per reweight");
    o.add("step_ratio", s.step_ratio, "CP sigma/tau ratio");
    o.add("levels", s.levels, "Haar levels (wavelet-fista)");
    o.add("window", s.window, "FBP window: ramlak or hann");
    o.add("K", s.K, "iterations of the mbir-k initial guess");
    o.add("init_model", s.init_model, "solver of the mbir-k initial guess: tv or tpv");
    o.add("coarse_lambda", s.coarse_lambda, "weight of the mbir-k initial guess solver");
}

MethodOptions method_options(const std::string& method, const SolverArgs& s, double lambda_override = -1)
{
    require_method(method);
    MethodOptions m;
    m.method = method;
    m.cfg.p = method == "tpv-cp" ? s.p : 1.0;
    m.cfg.lambda = lambda_override >= 0 ? lambda_override : (s.lambda >= 0 ? s.lambda : default_lambda(method));
    m.cfg.eta = s.eta;
    m.cfg.beta = s.beta;
    m.cfg.tol = s.tol;
    m.cfg.max_total_iters = s.max_iters;
    m.cfg.inner_iters_per_reweight = s.inner_iters;
    m.cfg.cp_step_ratio = s.step_ratio;
    m.cfg.wavelet_levels = s.levels;
    m.window = window_from(s.window);
    m.cfg.validate();
    return m;
}

InitSpec init_spec(const std::string& init, const SolverArgs& s)
{
    InitSpec spec;
    spec.name = init;
    spec.model = model_from(s.init_model);
    spec.K = s.K;
    spec.coarse_cfg.lambda = s.coarse_lambda;
    spec.coarse_cfg.beta = s.beta;
    spec.coarse_cfg.p = s.p;
    spec.coarse_cfg.tol = s.tol;
    spec.coarse_cfg.cp_step_ratio = s.step_ratio;
    if (spec.uses_net())
        spec.weights_path = init.substr(4);
    else if (init != "zeros" && init != "fbp" && init != "mbir-k")
        throw UsageError("unknown init '" + init + "' (zeros, fbp, mbir-k, net:<weights>)");
    return spec;
}

struct ReconstructArgs {
    std::string sino, gt, out, method = "tpv-cp", init = "zeros";
    bool clip = false, png = false;
    SolverArgs solver;
};

void register_reconstruct(Options& o, ReconstructArgs& a)
{
    o.add("sino", a.sino, "sinogram .f32 (geometry from its JSON sidecar)");
    o.add("gt", a.gt, "ground-truth image .f32 for metrics");
    o.add("out", a.out, "output directory");
    o.add("method", a.method, "fbp, tv-sgp, wavelet-fista or tpv-cp");
    o.add("init", a.init, "zeros, fbp, mbir-k or net:<weights.dgwc>");
    o.flag("clip", a.clip, "clip negative FBP values");
    o.flag("png", a.png, "also write a 16-bit PNG of the reconstruction");
    register_solver(o, a.solver);
}

int run_reconstruct(const ReconstructArgs& a, json effective)
{
    if (a.sino.empty() || a.out.empty())
        throw UsageError("reconstruct: --sino and --out are required");
    MethodOptions m = method_options(a.method, a.solver);
    m.clip_fbp = a.clip;
    const InitSpec init = init_spec(a.init, a.solver);
    if (a.method == "fbp" && a.init != "zeros")
        throw UsageError("reconstruct: fbp takes no initial guess (--init " + a.init + ")");

    const SinogramFile sf = load_sinogram(a.sino);
    const auto& g = sf.geometry;
    if ((a.method == "fbp" || a.init == "fbp") && g.angular_range < 180.0)
        throw UsageError("reconstruct: FBP needs an angular range of at least 180 degrees (short scans are "
                         "not supported), data range is " + detail::fmt_g(g.angular_range));
    LoadedNet net;
    if (init.uses_net()) {
        net = load_network(init.weights_path);
        if (net.net->metadata().input == "FBP" && g.angular_range < 180.0)
            throw UsageError("reconstruct: the network's FBP input needs a range of at least 180 degrees");
    }

    effective["lambda"] = m.cfg.lambda;
    const fs::path out(a.out);
    Image x0(g.image_side);
    json dg_prov;
    Image dg_image;
    if (m.method != "fbp") {
        const PreparedInit p = prepare_init(make_strategy(init, &net), init, g, sf.y);
        x0 = p.x0;
        dg_prov = p.dg.provenance;
        dg_image = p.dg.x;
        if (a.init != "zeros")
            save_image(out / "deep_guess.f32", dg_image, {{"provenance", dg_prov}});
    }
    const SolveResult r = run_method(m, g, sf.y, x0);
    save_image(out / "recon.f32", r.x, {{"method", m.method}, {"init", a.init}});
    if (a.png)
        write_png16(out / "recon.png", r.x);

    json rep = report_json(r.report);
    rep["config_hash"] = run_hash(effective);
    rep["geometry"] = geometry_to_json(g);
    if (!dg_prov.is_null())
        rep["deep_guess"] = dg_prov;
    write_json(out / "report.json", rep);

    if (!a.gt.empty()) {
        const Image gt = load_image(a.gt);
        json metrics{{"ssim", ssim(r.x, gt)}, {"re", relative_error(r.x, gt)}, {"ssim_variant", "single-scale"}};
        if (a.init != "zeros" && m.method != "fbp") {
            metrics["ssim_dg"] = ssim(dg_image, gt);
            metrics["re_dg"] = relative_error(dg_image, gt);
        }
        write_json(out / "metrics.json", metrics);
    }
    write_json(out / "effective_config.json", effective);
    std::printf("%s: %d iterations (%s)\n", m.method.c_str(), r.report.iterations_used,
                m.method == "fbp" ? "direct" : to_string(r.report.stop_reason));
    return 0;
}

// --------------------------------------------------------------- benchmark

struct BenchmarkArgs {
    std::string dataset, split = "test", out, weights;
    int limit = 0;
    std::vector<std::string> methods{"fbp", "tv-sgp", "wavelet-fista", "tpv-cp"};
    std::vector<std::string> inits{"zeros"};
    std::vector<std::string> geometries;
    double lambda_tv = -1, lambda_w = -1, lambda_tpv = -1;
    bool noise_sweep = false;
    std::vector<double> nus = default_noise_sweep();
    SolverArgs solver;
};

void register_benchmark(Options& o, BenchmarkArgs& a)
{
    o.add("dataset", a.dataset, "dataset root (with manifest.json)");
    o.add("split", a.split, "train or test");
    o.add("limit", a.limit, "use the first N items (0 = all)");
    o.add("out", a.out, "output directory");
    o.add("methods", a.methods, "methods to run");
    o.add("inits", a.inits, "initial guesses: zeros, fbp, mbir-k, net (uses --weights)");
    o.add("geometries", a.geometries, "extra geometries RANGExANGLES, re-simulated from the ground truths");
    o.add("weights", a.weights, "network weights for the net init and the noise sweep");
    o.add("lambda_tv", a.lambda_tv, "mu of tv-sgp (default tuned value)");
    o.add("lambda_w", a.lambda_w, "lambda of wavelet-fista");
    o.add("lambda_tpv", a.lambda_tpv, "lambda of tpv-cp");
    o.flag("noise_sweep", a.noise_sweep, "re-simulate at every --nus level and emit SSIM-vs-nu series");
    o.add("nus", a.nus, "noise levels of the sweep");
    register_solver(o, a.solver);
}

FanBeamGeometry parse_geometry(const std::string& s, int side)
{
    const auto x = s.find('x');
    if (x == std::string::npos)
        throw UsageError("geometry '" + s + "' must look like RANGExANGLES, e.g. 180x30");
    try {
        return build_geometry(side, std::stoi(s.substr(x + 1)), std::stod(s.substr(0, x)));
    } catch (const std::logic_error&) {
        throw UsageError("geometry '" + s + "' must look like RANGExANGLES, e.g. 180x30");
    }
}

int run_benchmark(const BenchmarkArgs& a, json effective)
{
    if (a.dataset.empty() || a.out.empty())
        throw UsageError("benchmark: --dataset and --out are required");
    for (const auto& m : a.methods)
        require_method(m);
    const fs::path root(a.dataset), out(a.out);
    const json manifest = load_manifest(root);
    const FanBeamGeometry base = geometry_from_json(manifest.at("geometry"));
    const double base_nu = manifest.at("nu").get<double>();
    const std::string dataset_id = manifest.value("dataset_id", root.filename().string());

    LoadedNet net;
    const bool want_net = a.noise_sweep || std::find(a.inits.begin(), a.inits.end(), "net") != a.inits.end();
    if (want_net) {
        if (a.weights.empty())
            throw UsageError("benchmark: the net init and the noise sweep need --weights");
        net = load_network(a.weights);
    }
    const std::string wfp = want_net ? net.fingerprint : "";

    std::vector<json> items;
    for (const auto& item : manifest.at("items"))
        if (item.at("split") == a.split && (a.limit <= 0 || static_cast<int>(items.size()) < a.limit))
            items.push_back(item);
    if (items.empty())
        throw DomainError("benchmark: no items in split '" + a.split + "'");

    auto lambda_for = [&](const std::string& m) {
        if (m == "tv-sgp")
            return a.lambda_tv;
        if (m == "wavelet-fista")
            return a.lambda_w;
        if (m == "tpv-cp")
            return a.lambda_tpv;
        return -1.0;
    };
    auto init_for = [&](const std::string& name) {
        return init_spec(name == "net" ? "net:" + a.weights : name, a.solver);
    };
    // Record the weights actually used, so a re-run from this config is explicit.
    for (const auto& [m, key] : {std::pair{"tv-sgp", "lambda_tv"}, {"wavelet-fista", "lambda_w"}, {"tpv-cp", "lambda_tpv"}})
        effective[key] = method_options(m, a.solver, lambda_for(m)).cfg.lambda;
    const std::string chash = run_hash(effective);

    std::vector<BenchmarkRow> rows;
    auto provenance = [&](const json& item, std::uint64_t noise_seed) {
        return json{{"seed", item.at("seed")}, {"noise_seed", noise_seed}, {"config_hash", chash},
                    {"weights_fingerprint", wfp}};
    };

    if (!a.noise_sweep) {
        std::vector<FanBeamGeometry> geoms{base};
        for (const auto& s : a.geometries) {
            FanBeamGeometry g = parse_geometry(s, base.image_side);
            if (!(g == base))
                geoms.push_back(g);
        }
        for (const auto& item : items) {
            const Image gt = load_image(root / item.at("gt").get<std::string>());
            const SinogramFile stored = load_sinogram(root / item.at("sino").get<std::string>());
            const std::uint64_t noise_seed = item.at("noise_seed").get<std::uint64_t>();
            for (const auto& g : geoms) {
                const Sinogram y = g == base ? stored.y : simulate_sinogram(g, gt, base_nu, noise_seed);
                for (const auto& method : a.methods) {
                    const MethodOptions m = method_options(method, a.solver, lambda_for(method));
                    for (const auto& init : method == "fbp" ? std::vector<std::string>{"zeros"} : a.inits) {
                        if (method == "fbp" && g.angular_range < 180.0)
                            continue;
                        BenchmarkRow row = run_cell(m, init_for(init), &net, g, y, gt, base_nu);
                        row.init = method == "fbp" ? "none" : init;
                        row.dataset_id = dataset_id;
                        row.image_id = a.split + "/" + std::to_string(item.at("index").get<int>());
                        row.provenance.update(provenance(item, noise_seed));
                        std::fprintf(stderr, "%s %s %s %s ssim %.2f iters %d\n", row.image_id.c_str(),
                                     row.geometry.c_str(), method.c_str(), row.init.c_str(), row.ssim_out, row.iters);
                        rows.push_back(std::move(row));
                    }
                }
            }
        }
    } else {
        // Series: zeros-init tpv-cp, the network guess, tpv-cp started from it.
        const MethodOptions m = method_options("tpv-cp", a.solver, a.lambda_tpv);
        const InitSpec zeros = init_for("zeros"), dg = init_for("net");
        for (const auto& item : items) {
            const Image gt = load_image(root / item.at("gt").get<std::string>());
            const std::uint64_t noise_seed = item.at("noise_seed").get<std::uint64_t>();
            for (double nu : a.nus) {
                const Sinogram y = simulate_sinogram(base, gt, nu, noise_seed);
                for (const auto* init : {&zeros, &dg}) {
                    BenchmarkRow row = run_cell(m, *init, &net, base, y, gt, nu);
                    row.init = init == &zeros ? "zeros" : "net";
                    row.dataset_id = dataset_id;
                    row.image_id = a.split + "/" + std::to_string(item.at("index").get<int>());
                    row.provenance.update(provenance(item, noise_seed));
                    rows.push_back(std::move(row));
                }
            }
        }
    }

    // Tables.
    std::string csv = std::string(kCsvHeader) + "\n";
    json all = json::array();
    for (const auto& r : rows) {
        csv += csv_line(r) + "\n";
        all.push_back(row_to_json(r));
    }
    detail::write_text(out / "results.csv", csv);

    std::map<std::tuple<std::string, std::string, std::string, double>, std::vector<const BenchmarkRow*>> groups;
    for (const auto& r : rows)
        groups[{r.geometry, r.method, r.init, r.nu}].push_back(&r);
    std::string agg = "geometry,method,init,nu,n,ssim_mean,ssim_std,re_mean,re_std,iters_mean,iters_std\n";
    json agg_json = json::array();
    for (const auto& [key, list] : groups) {
        const Aggregate s = aggregate(list);
        const auto& [geo, method, init, nu] = key;
        agg += geo + "," + method + "," + init + "," + detail::fmt_g(nu) + "," + std::to_string(s.n) + "," +
               detail::fmt_g(s.ssim_mean) + "," + detail::fmt_g(s.ssim_std) + "," + detail::fmt_g(s.re_mean) + "," +
               detail::fmt_g(s.re_std) + "," + detail::fmt_g(s.iters_mean) + "," + detail::fmt_g(s.iters_std) + "\n";
        agg_json.push_back({{"geometry", geo}, {"method", method}, {"init", init}, {"nu", nu}, {"n", s.n},
                            {"ssim_mean", s.ssim_mean}, {"ssim_std", s.ssim_std}, {"re_mean", s.re_mean},
                            {"re_std", s.re_std}, {"iters_mean", s.iters_mean}, {"iters_std", s.iters_std}});
    }
    detail::write_text(out / "aggregate.csv", agg);

    json result{{"dataset_id", dataset_id}, {"config_hash", chash}, {"rows", all}, {"aggregate", agg_json}};
    if (a.noise_sweep) {
        json series{{"nu", a.nus}, {"zeros_cp", json::array()}, {"dg_image", json::array()}, {"dg_cp", json::array()}};
        for (double nu : a.nus) {
            double zc = 0, di = 0, dc = 0;
            int nz = 0, nd = 0;
            for (const auto& r : rows) {
                if (r.nu != nu)
                    continue;
                if (r.init == "zeros") {
                    zc += r.ssim_out;
                    ++nz;
                } else {
                    di += r.ssim_dg;
                    dc += r.ssim_out;
                    ++nd;
                }
            }
            series["zeros_cp"].push_back(zc / nz);
            series["dg_image"].push_back(di / nd);
            series["dg_cp"].push_back(dc / nd);
        }
        result["noise_sweep"] = series;
        std::string s = "nu,zeros_cp,dg_image,dg_cp\n";
        for (std::size_t i = 0; i < a.nus.size(); ++i)
            s += detail::fmt_g(a.nus[i]) + "," + detail::fmt_g(series["zeros_cp"][i].get<double>()) + "," +
                 detail::fmt_g(series["dg_image"][i].get<double>()) + "," +
                 detail::fmt_g(series["dg_cp"][i].get<double>()) + "\n";
        detail::write_text(out / "noise_sweep.csv", s);
    }
    write_json(out / "results.json", result);
    write_json(out / "effective_config.json", effective);
    std::fputs(agg.c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sparse-view CT reconstruction with Deep Guess initialisation"};
    app.require_subcommand(1);

    CLI::App* sim = app.add_subcommand("simulate", "generate a phantom dataset");
    Options sim_opts(sim);
    SimulateArgs sim_args;
    register_simulate(sim_opts, sim_args);

    CLI::App* rec = app.add_subcommand("reconstruct", "reconstruct one sinogram");
    Options rec_opts(rec);
    ReconstructArgs rec_args;
    register_reconstruct(rec_opts, rec_args);

    CLI::App* bench = app.add_subcommand("benchmark", "method x init x geometry tables, or the noise sweep");
    Options bench_opts(bench);
    BenchmarkArgs bench_args;
    register_benchmark(bench_opts, bench_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) {
            sim_opts.resolve();
            return run_simulate(sim_args, sim_opts.effective());
        }
        if (rec->parsed()) {
            rec_opts.resolve();
            return run_reconstruct(rec_args, rec_opts.effective());
        }
        bench_opts.resolve();
        return run_benchmark(bench_args, bench_opts.effective());
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    }
}
