#include "penn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace penn {

namespace {

void check_keys(const Json& doc, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : doc.items()) {
        if (!allowed.count(key)) {
            throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
        }
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    if (model.empty() == dataset_path.empty()) {
        throw std::invalid_argument("config: exactly one of model/dataset must be set");
    }
    if (!model.empty()) SimModel::by_name(model, d);  // throws for bad name or d
    if (imputers.empty()) throw std::invalid_argument("config: no imputers");
    if (!use_penn && !use_nn) throw std::invalid_argument("config: no estimators");
    if (repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
    if (width < 1) throw std::invalid_argument("config: width must be >= 1");
    if (!split_by_ratio) {
        if (split.train < 1 || split.validation < 1 || split.test < 2) {
            throw std::invalid_argument("config: split needs train/validation >= 1 and test >= 2");
        }
    } else {
        if (split_ratio.size() != 3) throw std::invalid_argument("config: ratio needs 3 entries");
        for (double r : split_ratio) {
            if (!(r > 0.0)) throw std::invalid_argument("config: ratio entries must be positive");
        }
    }
    if (oracle.kind != "auto" && oracle.kind != "closed_form" && oracle.kind != "monte_carlo" &&
        oracle.kind != "none") {
        throw std::invalid_argument("config: oracle kind must be auto/closed_form/monte_carlo/none");
    }
    if (oracle.budget < 10000) throw std::invalid_argument("config: oracle budget must be >= 10^4");
    train.validate();
}

ExperimentConfig ExperimentConfig::from_json(const Json& doc) {
    check_keys(doc, {"version", "model", "dataset", "d", "imputers", "estimators", "split",
                     "repetitions", "seed", "width", "imputer_fit", "train", "oracle", "out"},
               "top level");
    if (doc.value("version", 0) != 1) {
        throw std::invalid_argument("config: unsupported or missing version (expected 1)");
    }
    ExperimentConfig cfg;
    cfg.model = doc.value("model", "");
    cfg.dataset_path = doc.value("dataset", "");
    cfg.d = doc.value("d", cfg.d);
    if (doc.contains("imputers")) {
        cfg.imputers.clear();
        for (const auto& name : doc.at("imputers")) {
            cfg.imputers.push_back(imputer_kind_from_string(name.get<std::string>()));
        }
    }
    if (doc.contains("estimators")) {
        cfg.use_penn = false;
        cfg.use_nn = false;
        for (const auto& name : doc.at("estimators")) {
            const auto s = name.get<std::string>();
            if (s == "penn") {
                cfg.use_penn = true;
            } else if (s == "nn") {
                cfg.use_nn = true;
            } else {
                throw std::invalid_argument("config: unknown estimator '" + s + "'");
            }
        }
    }
    if (doc.contains("split")) {
        const Json& split = doc.at("split");
        check_keys(split, {"train", "validation", "test", "ratio"}, "split");
        if (split.contains("ratio")) {
            if (split.size() != 1) {
                throw std::invalid_argument("config: split ratio excludes explicit sizes");
            }
            cfg.split_by_ratio = true;
            cfg.split_ratio = split.at("ratio").get<std::vector<double>>();
        } else {
            cfg.split.train = split.at("train").get<std::size_t>();
            cfg.split.validation = split.at("validation").get<std::size_t>();
            cfg.split.test = split.at("test").get<std::size_t>();
        }
    }
    cfg.repetitions = doc.value("repetitions", cfg.repetitions);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.width = doc.value("width", cfg.width);
    if (doc.contains("imputer_fit")) {
        const auto mode = doc.at("imputer_fit").get<std::string>();
        if (mode == "train_only") {
            cfg.imputer_fit_train_only = true;
        } else if (mode != "all") {
            throw std::invalid_argument("config: imputer_fit must be 'all' or 'train_only'");
        }
    }
    if (doc.contains("train")) {
        const Json& tr = doc.at("train");
        check_keys(tr,
                   {"warm_epochs", "lambda_grid", "early_stop_delta", "early_stop_patience",
                    "max_epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon"},
                   "train");
        cfg.train.warm_epochs = tr.value("warm_epochs", cfg.train.warm_epochs);
        if (tr.contains("lambda_grid")) cfg.train.lambda_grid = tr.at("lambda_grid").get<Vector>();
        cfg.train.early_stop_delta = tr.value("early_stop_delta", cfg.train.early_stop_delta);
        cfg.train.early_stop_patience =
            tr.value("early_stop_patience", cfg.train.early_stop_patience);
        cfg.train.max_epochs = tr.value("max_epochs", cfg.train.max_epochs);
        cfg.train.batch_size = tr.value("batch_size", cfg.train.batch_size);
        cfg.train.adam.learning_rate = tr.value("learning_rate", cfg.train.adam.learning_rate);
        cfg.train.adam.beta1 = tr.value("beta1", cfg.train.adam.beta1);
        cfg.train.adam.beta2 = tr.value("beta2", cfg.train.adam.beta2);
        cfg.train.adam.epsilon = tr.value("epsilon", cfg.train.adam.epsilon);
    }
    if (doc.contains("oracle")) {
        const Json& oc = doc.at("oracle");
        check_keys(oc, {"kind", "budget"}, "oracle");
        cfg.oracle.kind = oc.value("kind", cfg.oracle.kind);
        cfg.oracle.budget = oc.value("budget", cfg.oracle.budget);
    }
    cfg.out_dir = doc.value("out", "");
    cfg.validate();
    return cfg;
}

Json ExperimentConfig::to_json() const {
    Json doc;
    doc["version"] = 1;
    if (!model.empty()) doc["model"] = model;
    if (!dataset_path.empty()) doc["dataset"] = dataset_path;
    doc["d"] = d;
    Json imps = Json::array();
    for (auto k : imputers) imps.push_back(to_string(k));
    doc["imputers"] = imps;
    Json ests = Json::array();
    if (use_penn) ests.push_back("penn");
    if (use_nn) ests.push_back("nn");
    doc["estimators"] = ests;
    if (split_by_ratio) {
        doc["split"] = Json{{"ratio", split_ratio}};
    } else {
        doc["split"] = Json{
            {"train", split.train}, {"validation", split.validation}, {"test", split.test}};
    }
    doc["repetitions"] = repetitions;
    doc["seed"] = seed;
    doc["width"] = width;
    doc["imputer_fit"] = imputer_fit_train_only ? "train_only" : "all";
    doc["train"] = Json{{"warm_epochs", train.warm_epochs},
                        {"lambda_grid", train.lambda_grid},
                        {"early_stop_delta", train.early_stop_delta},
                        {"early_stop_patience", train.early_stop_patience},
                        {"max_epochs", train.max_epochs},
                        {"batch_size", train.batch_size},
                        {"learning_rate", train.adam.learning_rate},
                        {"beta1", train.adam.beta1},
                        {"beta2", train.adam.beta2},
                        {"epsilon", train.adam.epsilon}};
    doc["oracle"] = Json{{"kind", oracle.kind}, {"budget", oracle.budget}};
    if (!out_dir.empty()) doc["out"] = out_dir;
    return doc;
}

namespace {

/// Rows of one repetition, already assigned to splits.
struct RepRows {
    PartialMatrix raw;  // masked covariates, all rows
    Vector y;
    SplitSizes sizes;
};

Matrix omega_as_matrix(const PartialMatrix& raw, std::size_t begin, std::size_t end) {
    Matrix m(end - begin, raw.cols);
    for (std::size_t i = begin; i < end; ++i) {
        for (std::size_t j = 0; j < raw.cols; ++j) {
            m(i - begin, j) = raw.is_observed(i, j) ? 1.0 : 0.0;
        }
    }
    return m;
}

Matrix slice_rows(const Matrix& m, std::size_t begin, std::size_t end) {
    Matrix out(end - begin, m.cols);
    for (std::size_t i = begin; i < end; ++i) {
        std::copy(m.row_ptr(i), m.row_ptr(i) + m.cols, out.row_ptr(i - begin));
    }
    return out;
}

PartialMatrix take_rows(const PartialMatrix& src, const std::vector<std::size_t>& order,
                        std::size_t count) {
    PartialMatrix out(count, src.cols);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < src.cols; ++j) {
            if (src.is_observed(order[i], j)) {
                out.set(i, j, src.values(order[i], j));
            } else {
                out.set_missing(i, j);
            }
        }
    }
    return out;
}

RepRows make_rep_rows(const ExperimentConfig& cfg, const SimModel* model, const DataFile* file,
                      std::size_t rep) {
    Rng data_rng = Rng(cfg.seed).derive(rep).derive(0);
    RepRows rows;
    if (model) {
        rows.sizes = cfg.split;
        SampleSet s = sample(*model, rows.sizes.total(), data_rng);
        rows.raw = mask_rows(s.x, s.omega);
        rows.y = std::move(s.y);
        return rows;
    }
    const std::size_t n = file->size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    data_rng.shuffle(order);
    if (cfg.split_by_ratio) {
        const double total = cfg.split_ratio[0] + cfg.split_ratio[1] + cfg.split_ratio[2];
        rows.sizes.train = static_cast<std::size_t>(std::floor(n * cfg.split_ratio[0] / total));
        rows.sizes.validation =
            static_cast<std::size_t>(std::floor(n * cfg.split_ratio[1] / total));
        rows.sizes.test = n - rows.sizes.train - rows.sizes.validation;
    } else {
        rows.sizes = cfg.split;
        if (rows.sizes.total() > n) {
            throw std::invalid_argument("config: split sizes exceed dataset rows");
        }
    }
    order.resize(rows.sizes.total());
    rows.raw = take_rows(file->x, order, order.size());
    rows.y.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) rows.y[i] = file->y[order[i]];
    return rows;
}

struct CurveCapture {
    bool wanted = false;
    std::vector<std::array<double, 6>> rows;  // z1, omega1, y, fstar, penn, nn
};

RepResult process_unit(const ExperimentConfig& cfg, const SimModel* model, const RepRows& rows,
                       std::size_t rep, std::size_t imputer_index, CurveCapture* curve) {
    const Imputer::Kind ik = cfg.imputers[imputer_index];
    RepResult unit;
    unit.repetition = rep;
    unit.imputer = to_string(ik);

    const auto& sizes = rows.sizes;
    const std::size_t n_train = sizes.train;
    const std::size_t n_val = sizes.validation;
    const std::size_t n_test = sizes.test;

    Imputer imputer;
    if (cfg.imputer_fit_train_only) {
        std::vector<std::size_t> train_idx(n_train);
        std::iota(train_idx.begin(), train_idx.end(), 0);
        imputer = fit_imputer(ik, take_rows(rows.raw, train_idx, n_train));
    } else {
        imputer = fit_imputer(ik, rows.raw);
    }
    Matrix z_all = impute_all(imputer, rows.raw);

    TrainData train{slice_rows(z_all, 0, n_train), omega_as_matrix(rows.raw, 0, n_train),
                    Targets::squared(Matrix(n_train, 1))};
    for (std::size_t i = 0; i < n_train; ++i) train.y.values(i, 0) = rows.y[i];
    TrainData val{slice_rows(z_all, n_train, n_train + n_val),
                  omega_as_matrix(rows.raw, n_train, n_train + n_val),
                  Targets::squared(Matrix(n_val, 1))};
    for (std::size_t i = 0; i < n_val; ++i) val.y.values(i, 0) = rows.y[n_train + i];

    EvalRows test;
    test.z = slice_rows(z_all, n_train + n_val, n_train + n_val + n_test);
    test.omega = omega_as_matrix(rows.raw, n_train + n_val, n_train + n_val + n_test);
    test.y.assign(rows.y.begin() + n_train + n_val, rows.y.end());

    // Bayes oracle (simulated models only)
    Rng rep_rng = Rng(cfg.seed).derive(rep);
    std::optional<Vector> fstar;
    if (model && cfg.oracle.kind != "none") {
        BayesOracle oracle;
        const bool closed = cfg.oracle.kind == "closed_form" ||
                            (cfg.oracle.kind == "auto" && has_closed_form(*model, ik));
        if (closed) {
            oracle = BayesOracle::closed_form(*model, ik);
        } else {
            oracle = BayesOracle::monte_carlo(*model, ik, cfg.oracle.budget,
                                              rep_rng.derive(90 + imputer_index).seed());
        }
        fstar = oracle_values(oracle, test);
    }

    const Task task = Task::regression();
    auto evaluate = [&](const std::string& label, const Predictor& predict) {
        MetricsRecord rec;
        rec.label = label;
        rec.n_test = n_test;
        rec.mse = mse(predict, test);
        rec.puv = puv(predict, test);
        if (fstar) {
            Estimate e = excess_risk(predict, *fstar, test);
            rec.has_oracle = true;
            rec.excess_risk = e.value;
            rec.excess_se = e.std_error;
        }
        return rec;
    };

    Vector penn_preds, nn_preds;
    if (cfg.use_penn) {
        TrainConfig tcfg = cfg.train;
        tcfg.seed = rep_rng.derive(1 + imputer_index * 2).seed();
        const int d = static_cast<int>(rows.raw.cols);
        std::function<Penn(Rng&)> builder = [&](Rng& r) {
            return build_paper_penn(d, task, r, cfg.width);
        };
        TrainReport<Penn> report = lambda_sweep(builder, train, val, tcfg);
        const Penn net = report.selected();
        Predictor predict = [net](std::span<const double> z, std::span<const double> omega) {
            return penn_forward(net, z, omega)[0];
        };
        unit.penn = evaluate("penn_" + unit.imputer, predict);
        unit.penn_lambda = report.selected_lambda;
        if (curve && curve->wanted) {
            penn_preds.resize(n_test);
            for (std::size_t i = 0; i < n_test; ++i) {
                penn_preds[i] = predict({test.z.row_ptr(i), test.z.cols},
                                        {test.omega.row_ptr(i), test.omega.cols});
            }
        }
    }
    if (cfg.use_nn) {
        TrainConfig tcfg = cfg.train;
        tcfg.seed = rep_rng.derive(2 + imputer_index * 2).seed();
        const int d = static_cast<int>(rows.raw.cols);
        std::function<Mlp(Rng&)> builder = [&](Rng& r) {
            return build_paper_nn(d, task, r, cfg.width);
        };
        TrainReport<Mlp> report = lambda_sweep(builder, train, val, tcfg);
        const Mlp net = report.selected();
        Predictor predict = [net](std::span<const double> z, std::span<const double>) {
            return forward(net, z)[0];
        };
        unit.nn = evaluate("nn_" + unit.imputer, predict);
        unit.nn_lambda = report.selected_lambda;
        if (curve && curve->wanted) {
            nn_preds.resize(n_test);
            for (std::size_t i = 0; i < n_test; ++i) {
                nn_preds[i] = predict({test.z.row_ptr(i), test.z.cols},
                                      {test.omega.row_ptr(i), test.omega.cols});
            }
        }
    }

    if (curve && curve->wanted) {
        curve->rows.clear();
        for (std::size_t i = 0; i < n_test; ++i) {
            curve->rows.push_back({test.z(i, 0), test.omega(i, 0), test.y[i],
                                   fstar ? (*fstar)[i] : 0.0,
                                   penn_preds.empty() ? 0.0 : penn_preds[i],
                                   nn_preds.empty() ? 0.0 : nn_preds[i]});
        }
    }
    return unit;
}

}  // namespace

std::size_t worker_count(std::size_t repetitions) {
    std::size_t workers = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("PENN_THREADS")) {
        const long parsed = std::atol(env);
        if (parsed >= 1) workers = static_cast<std::size_t>(parsed);
    }
    if (workers < 1) workers = 1;
    return std::min(workers, repetitions);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentResult result;
    result.config = config;

    std::optional<SimModel> model;
    std::optional<DataFile> file;
    if (!config.model.empty()) {
        model = SimModel::by_name(config.model, config.d);
    } else {
        file = read_dataset_csv(config.dataset_path);
    }

    const std::size_t reps = config.repetitions;
    const std::size_t n_imp = config.imputers.size();
    result.units.resize(reps * n_imp);
    std::vector<CurveCapture> curves(reps);
    const bool capture_curve = config.model == "example1";

    auto run_rep = [&](std::size_t rep) {
        RepRows rows;
        try {
            rows = make_rep_rows(config, model ? &*model : nullptr, file ? &*file : nullptr, rep);
        } catch (const std::exception& e) {
            for (std::size_t i = 0; i < n_imp; ++i) {
                RepResult& unit = result.units[rep * n_imp + i];
                unit.repetition = rep;
                unit.imputer = to_string(config.imputers[i]);
                unit.failed = true;
                unit.error = e.what();
            }
            return;
        }
        for (std::size_t i = 0; i < n_imp; ++i) {
            CurveCapture* curve = nullptr;
            if (capture_curve && rep == 0 && i == 0) {
                curves[rep].wanted = true;
                curve = &curves[rep];
            }
            try {
                result.units[rep * n_imp + i] =
                    process_unit(config, model ? &*model : nullptr, rows, rep, i, curve);
            } catch (const std::exception& e) {
                RepResult& unit = result.units[rep * n_imp + i];
                unit.repetition = rep;
                unit.imputer = to_string(config.imputers[i]);
                unit.failed = true;
                unit.error = e.what();
            }
        }
    };

    const std::size_t workers = worker_count(reps);
    if (workers <= 1) {
        for (std::size_t rep = 0; rep < reps; ++rep) run_rep(rep);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t rep = next.fetch_add(1);
                    if (rep >= reps) break;
                    run_rep(rep);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    // per-imputer paired summaries
    if (config.use_penn && config.use_nn) {
        for (std::size_t i = 0; i < n_imp; ++i) {
            std::vector<PairedReport> paired;
            for (std::size_t rep = 0; rep < reps; ++rep) {
                const RepResult& unit = result.units[rep * n_imp + i];
                if (!unit.failed && unit.penn && unit.nn) {
                    paired.push_back({rep, *unit.penn, *unit.nn});
                }
            }
            if (!paired.empty()) {
                result.summaries.emplace_back(to_string(config.imputers[i]),
                                              paired_comparison(std::move(paired)));
            }
        }
    }

    // stash the curve rows (repetition 0) in the result for emission
    if (capture_curve && !curves.empty() && curves[0].wanted) {
        result.curve_rows = std::move(curves[0].rows);
    }
    return result;
}

Json ExperimentResult::to_json() const {
    Json doc;
    doc["format"] = "penn-result";
    doc["version"] = 1;
    doc["config"] = config.to_json();
    Json units_json = Json::array();
    for (const auto& unit : units) {
        Json u;
        u["repetition"] = unit.repetition;
        u["imputer"] = unit.imputer;
        u["failed"] = unit.failed;
        if (unit.failed) {
            u["error"] = unit.error;
        } else {
            if (unit.penn) {
                u["penn"] = penn::to_json(*unit.penn);
                u["penn_lambda"] = unit.penn_lambda;
            }
            if (unit.nn) {
                u["nn"] = penn::to_json(*unit.nn);
                u["nn_lambda"] = unit.nn_lambda;
            }
        }
        units_json.push_back(std::move(u));
    }
    doc["units"] = std::move(units_json);
    Json summaries_json = Json::array();
    for (const auto& [imputer, summary] : summaries) {
        Json s = penn::to_json(summary);
        s["imputer"] = imputer;
        summaries_json.push_back(std::move(s));
    }
    doc["summaries"] = std::move(summaries_json);
    return doc;
}

ExperimentConfig preset_config(const std::string& preset, double scale, std::uint64_t seed) {
    if (!(scale > 0.0 && scale <= 1.0)) {
        throw std::invalid_argument("preset: scale must lie in (0, 1]");
    }
    auto scaled = [&](double base) {
        return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(base * scale)));
    };
    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.repetitions = 10;
    cfg.width = 70;
    if (preset == "example1") {
        cfg.model = "example1";
        cfg.d = 1;
        cfg.imputers = {Imputer::Kind::Zero};
        cfg.split = {scaled(1000), scaled(500), scaled(500)};
    } else if (preset == "model1" || preset == "model2" || preset == "model3" ||
               preset == "model4") {
        cfg.model = preset;
        cfg.d = 20;
        cfg.imputers = {Imputer::Kind::ColumnMean, Imputer::Kind::Iterative};
        cfg.split = {scaled(10000), scaled(5000), scaled(5000)};
    } else {
        throw std::invalid_argument("preset: unknown preset '" + preset + "'");
    }
    cfg.validate();
    return cfg;
}

void write_boxplot_svg(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, BoxStats>>& groups,
                       const std::string& title, const std::string& y_label) {
    if (groups.empty()) throw std::invalid_argument("boxplot: no groups");
    double lo = groups[0].second.min, hi = groups[0].second.max;
    for (const auto& [label, box] : groups) {
        lo = std::min(lo, box.min);
        hi = std::max(hi, box.max);
    }
    if (hi <= lo) hi = lo + 1.0;
    const double pad = 0.08 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double plot_left = 80.0, plot_top = 50.0, plot_h = 300.0;
    const double slot = 110.0;
    const double width = plot_left + slot * groups.size() + 40.0;
    const double height = plot_top + plot_h + 70.0;
    auto ycoord = [&](double v) { return plot_top + plot_h * (hi - v) / (hi - lo); };

    std::ostringstream svg;
    char buf[128];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };
    auto tick_label = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.4g", v);
        return std::string(buf);
    };
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";
    svg << "<text x=\"16\" y=\"" << num(plot_top + plot_h / 2)
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << num(plot_top + plot_h / 2)
        << ")\">" << y_label << "</text>\n";
    // axis and ticks
    svg << "<line x1=\"" << num(plot_left) << "\" y1=\"" << num(plot_top) << "\" x2=\""
        << num(plot_left) << "\" y2=\"" << num(plot_top + plot_h)
        << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        const double y = ycoord(v);
        svg << "<line x1=\"" << num(plot_left - 5) << "\" y1=\"" << num(y) << "\" x2=\""
            << num(plot_left) << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << num(plot_left - 9) << "\" y=\"" << num(y + 4)
            << "\" text-anchor=\"end\">" << tick_label(v) << "</text>\n";
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& [label, box] = groups[g];
        const double cx = plot_left + slot * (g + 0.5);
        const double half = 26.0;
        const bool is_penn = label.rfind("penn", 0) == 0 || label.rfind("PENN", 0) == 0;
        const char* color = is_penn ? "#c23b3b" : "#3b5fc2";
        svg << "<line x1=\"" << num(cx) << "\" y1=\"" << num(ycoord(box.min)) << "\" x2=\""
            << num(cx) << "\" y2=\"" << num(ycoord(box.max)) << "\" stroke=\"black\"/>\n";
        for (double whisker : {box.min, box.max}) {
            svg << "<line x1=\"" << num(cx - half / 2) << "\" y1=\"" << num(ycoord(whisker))
                << "\" x2=\"" << num(cx + half / 2) << "\" y2=\"" << num(ycoord(whisker))
                << "\" stroke=\"black\"/>\n";
        }
        svg << "<rect x=\"" << num(cx - half) << "\" y=\"" << num(ycoord(box.q3)) << "\" width=\""
            << num(2 * half) << "\" height=\"" << num(ycoord(box.q1) - ycoord(box.q3))
            << "\" fill=\"" << color << "\" fill-opacity=\"0.45\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << num(cx - half) << "\" y1=\"" << num(ycoord(box.median))
            << "\" x2=\"" << num(cx + half) << "\" y2=\"" << num(ycoord(box.median))
            << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << num(cx) << "\" y=\"" << num(plot_top + plot_h + 22)
            << "\" text-anchor=\"middle\">" << label << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << svg.str();
}

std::vector<std::filesystem::path> write_experiment_outputs(const ExperimentResult& result,
                                                            const std::filesystem::path& out_dir,
                                                            bool emit_plots) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> files;

    const auto result_path = out_dir / "result.json";
    save_json(result_path, result.to_json());
    files.push_back(result_path);

    const auto per_seed_path = out_dir / "per_seed.csv";
    {
        std::ofstream out(per_seed_path);
        if (!out) throw std::runtime_error("cannot open " + per_seed_path.string());
        out << "repetition,imputer,estimator,selected_lambda,n_test,mse,puv,excess_risk,"
               "excess_se\n";
        auto emit = [&](const RepResult& unit, const MetricsRecord& rec, double lambda,
                        const char* estimator) {
            out << unit.repetition << ',' << unit.imputer << ',' << estimator << ','
                << format_double(lambda) << ',' << rec.n_test << ',' << format_double(rec.mse)
                << ',' << format_double(rec.puv) << ',';
            if (rec.has_oracle) {
                out << format_double(rec.excess_risk) << ',' << format_double(rec.excess_se);
            } else {
                out << ',';
            }
            out << '\n';
        };
        for (const auto& unit : result.units) {
            if (unit.failed) continue;
            if (unit.penn) emit(unit, *unit.penn, unit.penn_lambda, "penn");
            if (unit.nn) emit(unit, *unit.nn, unit.nn_lambda, "nn");
        }
    }
    files.push_back(per_seed_path);

    if (emit_plots && !result.summaries.empty()) {
        std::vector<std::pair<std::string, BoxStats>> groups;
        std::string metric = result.summaries.front().second.metric;
        for (const auto& [imputer, summary] : result.summaries) {
            groups.emplace_back("penn_" + imputer, summary.penn_box);
            groups.emplace_back("nn_" + imputer, summary.nn_box);
        }
        const auto plot_path = out_dir / (metric + "_boxplot.svg");
        write_boxplot_svg(plot_path, groups,
                          result.config.model.empty() ? "dataset" : result.config.model, metric);
        files.push_back(plot_path);
    }

    if (emit_plots && !result.curve_rows.empty()) {
        const auto curve_path = out_dir / "example1_curve.csv";
        std::ofstream out(curve_path);
        if (!out) throw std::runtime_error("cannot open " + curve_path.string());
        out << "z,omega,y,bayes,penn,nn\n";
        for (const auto& row : result.curve_rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out << ',';
                out << format_double(row[c]);
            }
            out << '\n';
        }
        files.push_back(curve_path);
    }

    Json manifest;
    manifest["format"] = "penn-manifest";
    manifest["version"] = 1;
    manifest["seed"] = result.config.seed;
    if (!result.config.model.empty()) manifest["model"] = result.config.model;
    Json file_list = Json::array();
    for (const auto& f : files) {
        file_list.push_back(Json{{"path", f.filename().string()}, {"hash", file_hash(f)}});
    }
    manifest["files"] = std::move(file_list);
    const auto manifest_path = out_dir / "manifest.json";
    save_json(manifest_path, manifest);
    files.push_back(manifest_path);
    return files;
}

}  // namespace penn
