// fuse command-line tool: train / score / depth / bench-synthetic /
// bench-outlier / grid-eval. Every output file starts with a comment line
// echoing the resolved configuration; all commands are deterministic given
// their flags (timing values excepted).

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fuse/fuse.hpp"

namespace {

using fuse::Matrix;

std::string join_kv(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ostringstream os;
    os << "fuse " << fuse::kVersion;
    for (const auto& [k, v] : kv) os << " " << k << "=" << v;
    return os.str();
}

std::string basename_no_ext(const std::string& path) {
    const auto slash = path.find_last_of('/');
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    const auto dotpos = name.find_last_of('.');
    if (dotpos != std::string::npos && dotpos > 0) name = name.substr(0, dotpos);
    return name;
}

Matrix gather_rows(const Matrix& z, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), z.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* src = z.row(idx[i]);
        std::copy(src, src + z.cols, out.row(i));
    }
    return out;
}

// Euclidean distance to the nearest declared population center.
std::vector<double> distance_to_center(const Matrix& samples, const Matrix& centers) {
    std::vector<double> out(samples.rows);
    for (std::size_t i = 0; i < samples.rows; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centers.rows; ++c)
            best = std::min(best,
                            fuse::squared_distance(samples.row(i), centers.row(c), samples.cols));
        out[i] = std::sqrt(best);
    }
    return out;
}

struct BenchRow {
    std::string method;
    std::string dataset;
    std::string metric;
    double value;
    std::uint64_t seed;
    double wall_ms;
};

void write_bench_report(const std::string& path, const std::string& config_echo,
                        const std::vector<std::string>& warnings,
                        const std::vector<BenchRow>& rows) {
    std::ofstream out(path);
    if (!out) throw fuse::data_error("cannot write '" + path + "'");
    out << "# " << config_echo << "\n";
    for (const auto& w : warnings) out << "# warning: " << w << "\n";
    out << "method,dataset,metric,value,seed,wall_ms\n";
    for (const auto& r : rows)
        out << r.method << "," << r.dataset << "," << r.metric << ","
            << fuse::format_double(r.value) << "," << r.seed << ","
            << fuse::format_double(r.wall_ms) << "\n";
    if (!out) throw fuse::data_error("write failed for '" + path + "'");
}

double wall_ms_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

// Flat key=value config support: `--config FILE` may supply any flag of the
// invoked command; flags given on the command line win. Lines starting with
// '#' and blank lines are ignored.
std::vector<std::string> apply_config_file(const std::vector<std::string>& argv_in) {
    std::vector<std::string> args;
    std::string config_path;
    for (std::size_t i = 0; i < argv_in.size(); ++i) {
        const std::string& a = argv_in[i];
        if (a == "--config") {
            if (i + 1 >= argv_in.size())
                throw fuse::parameter_error("--config expects a file path");
            config_path = argv_in[++i];
        } else if (a.rfind("--config=", 0) == 0) {
            config_path = a.substr(9);
        } else {
            args.push_back(a);
        }
    }
    if (config_path.empty()) return args;

    std::ifstream in(config_path);
    if (!in) throw fuse::data_error("cannot open config file '" + config_path + "'");
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw fuse::data_error(config_path + ":" + std::to_string(line_no) +
                                   ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw fuse::data_error(config_path + ":" + std::to_string(line_no) +
                                   ": empty key");
        const std::string flag = "--" + key;
        bool given = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
        if (given) continue;
        args.push_back(flag);
        args.push_back(value);
    }
    return args;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string config_file;
    std::string data;
    std::string out;
    std::string log;
    fuse::TrainConfig cfg;
    std::string scheme = "s1";
    std::string metric = "l2";
};

void add_train_options(CLI::App* cmd, TrainArgs& a) {
    cmd->add_option("--data", a.data, "training matrix CSV")->required();
    cmd->add_option("--out", a.out, "output model JSON")->required();
    cmd->add_option("--seed", a.cfg.seed, "rng seed");
    cmd->add_option("--epochs", a.cfg.epochs, "training epochs");
    cmd->add_option("--batch-size", a.cfg.batch_size, "mini-batch size");
    cmd->add_option("--dsm-resamples", a.cfg.dsm_resamples, "noise passes per epoch");
    cmd->add_option("--eta", a.cfg.eta, "noise scale");
    cmd->add_option("--anchors", a.cfg.anchors_per_pair, "anchors per candidate pair");
    cmd->add_option("--scheme", a.scheme, "sampling scheme s1..s4");
    cmd->add_option("--metric", a.metric, "dissimilarity: l1, l2 or cosine");
    cmd->add_option("--hidden", a.cfg.hidden, "encoder width q");
    cmd->add_option("--lr", a.cfg.lr, "Adam learning rate");
    cmd->add_option("--log", a.log, "optional per-epoch loss CSV");
    cmd->add_option("--config", a.config_file,
                    "key=value file supplying any flag (command line wins)");
}

int run_train(TrainArgs& a) {
    a.cfg.scheme = fuse::scheme_from_name(a.scheme);
    a.cfg.metric = fuse::metric_from_name(a.metric);
    a.cfg.validate();
    const Matrix z = fuse::read_csv_matrix(a.data);
    const fuse::TrainedModel model = fuse::train(z, a.cfg);
    fuse::save_model(a.out, model);
    for (const auto& w : model.warnings) std::cerr << "warning: " << w << "\n";
    if (!a.log.empty()) {
        std::ofstream log(a.log);
        if (!log) throw fuse::data_error("cannot write '" + a.log + "'");
        log << "epoch,global_loss,local_loss,wall_ms\n";
        for (const auto& e : model.log)
            log << e.epoch << "," << fuse::format_double(e.global_loss) << ","
                << fuse::format_double(e.local_loss) << ","
                << fuse::format_double(e.wall_ms) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreArgs {
    std::string config_file;
    std::string model;
    std::string data;
    std::string out;
    std::vector<double> ts = {0.5};
};

void add_score_options(CLI::App* cmd, ScoreArgs& a) {
    cmd->add_option("--model", a.model, "model JSON")->required();
    cmd->add_option("--data", a.data, "matrix CSV to score")->required();
    cmd->add_option("--out", a.out, "output CSV")->required();
    cmd->add_option("--t", a.ts, "homotopy parameter(s) in [0,1]")->delimiter(',');
    cmd->add_option("--config", a.config_file,
                    "key=value file supplying any flag (command line wins)");
}

int run_score(ScoreArgs& a) {
    const fuse::TrainedModel model = fuse::load_model(a.model);
    const Matrix z = fuse::read_csv_matrix(a.data);
    if (z.cols != model.params.p)
        throw fuse::contract_error("score: data has " + std::to_string(z.cols) +
                                   " columns, model expects " +
                                   std::to_string(model.params.p));
    const fuse::GridScores scores = fuse::score_grid(model, z, a.ts);

    std::ostringstream ts_echo;
    for (std::size_t k = 0; k < a.ts.size(); ++k)
        ts_echo << (k ? ";" : "") << fuse::format_double(a.ts[k]);
    std::ofstream out(a.out);
    if (!out) throw fuse::data_error("cannot write '" + a.out + "'");
    out << "# "
        << join_kv({{"command", "score"},
                    {"model", a.model},
                    {"data", a.data},
                    {"t", ts_echo.str()}})
        << "\n";
    out << "index,f_g,f_l,t,f\n";
    for (std::size_t k = 0; k < a.ts.size(); ++k)
        for (std::size_t i = 0; i < z.rows; ++i)
            out << i << "," << fuse::format_double(scores.f_g[i]) << ","
                << fuse::format_double(scores.f_l[i]) << "," << fuse::format_double(a.ts[k])
                << "," << fuse::format_double(scores.f(i, k)) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// depth
// ---------------------------------------------------------------------------

struct DepthArgs {
    std::string config_file;
    std::string method = "mah";
    std::string ref;
    std::string query;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t directions = 0;
    double bandwidth = 0.0;
};

void add_depth_options(CLI::App* cmd, DepthArgs& a) {
    cmd->add_option("--method", a.method, "mah, spa, pot, pro, tukey or kde")->required();
    cmd->add_option("--ref", a.ref, "reference matrix CSV")->required();
    cmd->add_option("--query", a.query, "query matrix CSV")->required();
    cmd->add_option("--out", a.out, "output CSV")->required();
    cmd->add_option("--seed", a.seed, "direction rng seed (pro/tukey)");
    cmd->add_option("--directions", a.directions, "direction count override");
    cmd->add_option("--bandwidth", a.bandwidth, "kernel bandwidth (pot/kde)");
    cmd->add_option("--config", a.config_file,
                    "key=value file supplying any flag (command line wins)");
}

int run_depth(DepthArgs& a) {
    fuse::DepthRequest req;
    req.method = fuse::depth_method_from_name(a.method);
    req.reference = fuse::read_csv_matrix(a.ref);
    req.queries = fuse::read_csv_matrix(a.query);
    req.seed = a.seed;
    req.directions = a.directions;
    req.bandwidth = a.bandwidth;
    const auto scores = fuse::depth_scores(req);

    std::ofstream out(a.out);
    if (!out) throw fuse::data_error("cannot write '" + a.out + "'");
    out << "# "
        << join_kv({{"command", "depth"},
                    {"method", a.method},
                    {"ref", a.ref},
                    {"query", a.query},
                    {"seed", std::to_string(a.seed)},
                    {"directions", std::to_string(fuse::direction_count(req))},
                    {"bandwidth", fuse::format_double(a.bandwidth)}})
        << "\n";
    out << "index,score\n";
    for (std::size_t i = 0; i < scores.size(); ++i)
        out << i << "," << fuse::format_double(scores[i]) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// grid-eval
// ---------------------------------------------------------------------------

struct GridArgs {
    std::string config_file;
    std::string model;
    std::string out;
    double xmin = -4, xmax = 4, ymin = -4, ymax = 4;
    std::size_t resolution = 50;
    std::vector<double> ts = {0.0, 0.25, 0.5, 0.75, 1.0};
};

void add_grid_options(CLI::App* cmd, GridArgs& a) {
    cmd->add_option("--model", a.model, "model JSON (2-D)")->required();
    cmd->add_option("--out", a.out, "output CSV")->required();
    cmd->add_option("--xmin", a.xmin);
    cmd->add_option("--xmax", a.xmax);
    cmd->add_option("--ymin", a.ymin);
    cmd->add_option("--ymax", a.ymax);
    cmd->add_option("--resolution", a.resolution, "grid points per axis");
    cmd->add_option("--t", a.ts, "homotopy parameters")->delimiter(',');
    cmd->add_option("--config", a.config_file,
                    "key=value file supplying any flag (command line wins)");
}

int run_grid(GridArgs& a) {
    const fuse::TrainedModel model = fuse::load_model(a.model);
    const Matrix out =
        fuse::grid_eval(model, a.xmin, a.xmax, a.ymin, a.ymax, a.resolution, a.ts);
    fuse::write_csv_matrix(
        a.out, out,
        join_kv({{"command", "grid-eval"},
                 {"model", a.model},
                 {"resolution", std::to_string(a.resolution)}}),
        {"x", "y", "t", "f"});
    return 0;
}

// ---------------------------------------------------------------------------
// bench-synthetic
// ---------------------------------------------------------------------------

struct BenchSynArgs {
    std::string config_file;
    std::string family = "normal";
    std::size_t n = 1000;
    std::size_t d = 2;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string out;
    std::string scheme = "s1";
    std::size_t hidden = 32;
    std::size_t epochs = 30;
    std::size_t timing_repeats = 3;
};

void add_bench_syn_options(CLI::App* cmd, BenchSynArgs& a) {
    cmd->add_option("--family", a.family, "normal, student_t, uniform or mixture");
    cmd->add_option("--n", a.n, "samples (train and held-out test each)");
    cmd->add_option("--d", a.d, "dimension");
    cmd->add_option("--seeds", a.seeds, "seed list")->delimiter(',');
    cmd->add_option("--out", a.out, "report CSV")->required();
    cmd->add_option("--scheme", a.scheme, "sampling scheme");
    cmd->add_option("--hidden", a.hidden, "encoder width q");
    cmd->add_option("--epochs", a.epochs, "training epochs");
    cmd->add_option("--timing-repeats", a.timing_repeats, "timing repeats");
    cmd->add_option("--config", a.config_file,
                    "key=value file supplying any flag (command line wins)");
}

int run_bench_synthetic(BenchSynArgs& a) {
    const fuse::Family family = fuse::family_from_name(a.family);
    std::vector<BenchRow> rows;
    const std::string dataset = a.family;

    for (std::uint64_t seed : a.seeds) {
        // one draw of 2n rows: first half trains, second half evaluates
        fuse::SyntheticSpec spec{family, 2 * a.n, a.d, seed};
        const auto data = fuse::gen_synthetic(spec);
        std::vector<std::size_t> train_idx(a.n), test_idx(a.n);
        for (std::size_t i = 0; i < a.n; ++i) {
            train_idx[i] = i;
            test_idx[i] = a.n + i;
        }
        const Matrix train = gather_rows(data.samples, train_idx);
        const Matrix test = gather_rows(data.samples, test_idx);
        std::vector<double> target = distance_to_center(test, data.centers);
        for (double& v : target) v = -v;  // centrality rises toward the center

        // FUSE
        fuse::TrainConfig cfg;
        cfg.scheme = fuse::scheme_from_name(a.scheme);
        cfg.hidden = a.hidden;
        cfg.epochs = a.epochs;
        cfg.seed = seed;
        const auto t0 = std::chrono::steady_clock::now();
        const fuse::TrainedModel model = fuse::train(train, cfg);
        const double train_ms = wall_ms_since(t0);

        const auto fg = fuse::score_global(model, test);
        const auto fl = fuse::score_local(model, test);
        const double fuse_wall = wall_ms_since(t0);
        rows.push_back({"global", dataset, "spearman", fuse::spearman(fg, target), seed,
                        fuse_wall});
        rows.push_back({"global", dataset, "kendall", fuse::kendall(fg, target), seed,
                        fuse_wall});
        rows.push_back({"local", dataset, "spearman", fuse::spearman(fl, target), seed,
                        fuse_wall});
        rows.push_back({"local", dataset, "kendall", fuse::kendall(fl, target), seed,
                        fuse_wall});
        rows.push_back({"fuse", dataset, "train_s", train_ms / 1000.0, seed, train_ms});
        const double fuse_us =
            1e6 * fuse::time_per_sample(
                      [&](const Matrix& m) { (void)fuse::score(model, m, 0.5); }, test,
                      a.timing_repeats);
        rows.push_back({"fuse", dataset, "infer_us", fuse_us, seed, fuse_wall});

        // classical baselines, reference = training sample
        for (fuse::DepthMethod m :
             {fuse::DepthMethod::KDE, fuse::DepthMethod::MAH, fuse::DepthMethod::POT,
              fuse::DepthMethod::PRO, fuse::DepthMethod::SPA, fuse::DepthMethod::TUKEY}) {
            fuse::DepthRequest req;
            req.reference = train;
            req.queries = test;
            req.method = m;
            req.seed = seed;
            const auto b0 = std::chrono::steady_clock::now();
            const auto scores = fuse::depth_scores(req);
            const double wall = wall_ms_since(b0);
            const std::string name = fuse::depth_method_name(m);
            rows.push_back(
                {name, dataset, "spearman", fuse::spearman(scores, target), seed, wall});
            rows.push_back(
                {name, dataset, "kendall", fuse::kendall(scores, target), seed, wall});
            const double us =
                1e6 * fuse::time_per_sample(
                          [&](const Matrix& queries) {
                              fuse::DepthRequest r;
                              r.reference = train;
                              r.queries = queries;
                              r.method = m;
                              r.seed = seed;
                              (void)fuse::depth_scores(r);
                          },
                          test, a.timing_repeats);
            rows.push_back({name, dataset, "infer_us", us, seed, wall});
        }
    }

    std::ostringstream seeds_echo;
    for (std::size_t i = 0; i < a.seeds.size(); ++i)
        seeds_echo << (i ? ";" : "") << a.seeds[i];
    write_bench_report(a.out,
                       join_kv({{"command", "bench-synthetic"},
                                {"family", a.family},
                                {"n", std::to_string(a.n)},
                                {"d", std::to_string(a.d)},
                                {"scheme", a.scheme},
                                {"hidden", std::to_string(a.hidden)},
                                {"epochs", std::to_string(a.epochs)},
                                {"seeds", seeds_echo.str()}}),
                       {}, rows);
    return 0;
}

// ---------------------------------------------------------------------------
// bench-outlier
// ---------------------------------------------------------------------------

struct BenchOutArgs {
    std::string config_file;
    std::string data;
    std::string labels;
    std::string out;
    std::string mode = "fixed";  // fixed | tuned
    std::uint64_t seed = 0;
    std::size_t hidden = 128;
    std::size_t epochs = 30;
};

void add_bench_out_options(CLI::App* cmd, BenchOutArgs& a) {
    cmd->add_option("--data", a.data, "feature matrix CSV")->required();
    cmd->add_option("--labels", a.labels, "0/1 label CSV (1 = anomaly)")->required();
    cmd->add_option("--out", a.out, "report CSV")->required();
    cmd->add_option("--mode", a.mode, "fixed (default config) or tuned (grid sweep)");
    cmd->add_option("--seed", a.seed, "rng seed");
    cmd->add_option("--hidden", a.hidden, "encoder width q");
    cmd->add_option("--epochs", a.epochs, "training epochs");
    cmd->add_option("--config", a.config_file,
                    "key=value file supplying any flag (command line wins)");
}

int run_bench_outlier(BenchOutArgs& a) {
    if (a.mode != "fixed" && a.mode != "tuned")
        throw fuse::parameter_error("bench-outlier: mode must be 'fixed' or 'tuned'");
    const fuse::LabeledData data = fuse::load_labeled(a.data, a.labels);
    const std::string dataset = basename_no_ext(a.data);

    fuse::OutlierBenchOptions opt;
    opt.tuned = a.mode == "tuned";
    opt.seed = a.seed;
    opt.hidden = a.hidden;
    opt.epochs = a.epochs;

    const auto t0 = std::chrono::steady_clock::now();
    const fuse::OutlierBenchResult result =
        fuse::run_outlier_bench(data.features, data.labels, opt);
    const double total_ms = wall_ms_since(t0);

    std::vector<BenchRow> rows;
    auto emit = [&](const std::string& method, const fuse::OutlierVariantResult& vr) {
        if (vr.folds == 0) return;
        // per-fold rows expose the chosen hyperparameters; the /mean rows
        // aggregate over usable folds
        for (const auto& sel : vr.per_fold) {
            const std::string chosen = method + "(metric=" + fuse::metric_name(sel.metric) +
                                       ",eta=" + fuse::format_double(sel.eta) +
                                       ",t=" + fuse::format_double(sel.t) + ")";
            const std::string fold_ds = dataset + "/fold" + std::to_string(sel.fold);
            rows.push_back({chosen, fold_ds, "auc_roc", sel.test_roc, a.seed, total_ms});
            rows.push_back({chosen, fold_ds, "auc_prc", sel.test_prc, a.seed, total_ms});
        }
        rows.push_back({method, dataset + "/mean", "auc_roc", vr.mean_roc, a.seed, total_ms});
        rows.push_back({method, dataset + "/mean", "auc_prc", vr.mean_prc, a.seed, total_ms});
    };
    emit("global", result.global);
    emit("local", result.local);
    emit("fuse", result.fused);

    write_bench_report(a.out,
                       join_kv({{"command", "bench-outlier"},
                                {"data", a.data},
                                {"labels", a.labels},
                                {"mode", a.mode},
                                {"hidden", std::to_string(a.hidden)},
                                {"epochs", std::to_string(a.epochs)},
                                {"seed", std::to_string(a.seed)}}),
                       result.warnings, rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fuse: trainable centrality scores with classical depth baselines"};
    app.require_subcommand(1);

    TrainArgs train_args;
    add_train_options(app.add_subcommand("train", "fit a model on a CSV matrix"),
                      train_args);
    ScoreArgs score_args;
    add_score_options(app.add_subcommand("score", "homotopy scores for new points"),
                      score_args);
    DepthArgs depth_args;
    add_depth_options(app.add_subcommand("depth", "classical depth baselines"), depth_args);
    GridArgs grid_args;
    add_grid_options(app.add_subcommand("grid-eval", "score a regular 2-D grid"), grid_args);
    BenchSynArgs bench_syn_args;
    add_bench_syn_options(
        app.add_subcommand("bench-synthetic", "rank-correlation benchmark on generated data"),
        bench_syn_args);
    BenchOutArgs bench_out_args;
    add_bench_out_options(
        app.add_subcommand("bench-outlier", "5-fold outlier detection benchmark"),
        bench_out_args);

    try {
        std::vector<std::string> raw(argv + 1, argv + argc);
        const std::vector<std::string> args = apply_config_file(raw);
        std::vector<const char*> cargv;
        cargv.push_back(argv[0]);
        for (const auto& a : args) cargv.push_back(a.c_str());
        app.parse(static_cast<int>(cargv.size()), cargv.data());
        if (app.got_subcommand("train")) return run_train(train_args);
        if (app.got_subcommand("score")) return run_score(score_args);
        if (app.got_subcommand("depth")) return run_depth(depth_args);
        if (app.got_subcommand("grid-eval")) return run_grid(grid_args);
        if (app.got_subcommand("bench-synthetic")) return run_bench_synthetic(bench_syn_args);
        if (app.got_subcommand("bench-outlier")) return run_bench_outlier(bench_out_args);
        std::cerr << "no command given\n";
        return 2;
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const fuse::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
