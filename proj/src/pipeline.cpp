#include "mbo/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "mbo/errors.hpp"
#include "mbo/eval.hpp"
#include "mbo/feed_io.hpp"
#include "mbo/manifest.hpp"
#include "mbo/report_json.hpp"
#include "mbo/timestamp.hpp"

namespace mbo {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string default_model_name(const PipelineModel& m) {
    std::string data = m.data == "lob" ? "LOB" : "MBO";
    std::string arch;
    switch (m.arch) {
        case nn::Arch::kLinear: arch = "LM"; break;
        case nn::Arch::kMlp: arch = "MLP"; break;
        case nn::Arch::kLstm: arch = "LSTM"; break;
        case nn::Arch::kAttention: arch = "Attention"; break;
    }
    return data + "-" + arch;
}

Decimal decimal_field(const json& j, const char* key, Decimal fallback) {
    if (!j.contains(key)) return fallback;
    Decimal d;
    std::string text = j.at(key).is_string() ? j.at(key).get<std::string>()
                                             : json(j.at(key)).dump();
    if (!Decimal::parse(text, d)) throw ConfigError(std::string("bad decimal for ") + key);
    return d;
}

ClassProportions sample_balance(const SampleSet& set) {
    std::vector<LabelClass> classes;
    classes.reserve(set.size());
    for (int c : set.label) classes.push_back(static_cast<LabelClass>(c));
    return class_balance(classes);
}

void write_probs_csv(const std::string& path, const std::vector<std::size_t>& ticks,
                     const std::vector<std::array<double, 3>>& probs) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "tick_index,p_down,p_stationary,p_up\n";
    char buf[128];
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g", ticks[i], probs[i][0],
                      probs[i][1], probs[i][2]);
        out << buf << '\n';
    }
}

TickSeries apply_lob_stats(const TickSeries& raw, const LobStats& stats) {
    TickSeries norm = raw;
    std::size_t width = static_cast<std::size_t>(raw.feature_width);
    for (std::size_t i = 0; i < raw.size(); ++i)
        for (std::size_t c = 0; c < width; ++c) {
            double& x = norm.rows[i * width + c];
            x = (x - stats.mean[c]) / stats.stddev[c];
        }
    return norm;
}

SampleSet strided(const SampleSet& set, int stride) {
    if (stride <= 1) return set;
    SampleSet out;
    out.series = set.series;
    out.lookback = set.lookback;
    for (std::size_t i = 0; i < set.size(); i += static_cast<std::size_t>(stride)) {
        out.end_tick.push_back(set.end_tick[i]);
        out.label.push_back(set.label[i]);
    }
    return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    json j = json::parse(in, nullptr, true, true);  // allow comments

    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
        throw ConfigError("config schema_version must be 1");

    PipelineConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.lookback = j.value("lookback", cfg.lookback);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.train_stride = j.value("train_stride", cfg.train_stride);
    if (j.contains("alpha") && !j.at("alpha").is_null())
        cfg.alpha = j.at("alpha").get<double>();
    if (j.contains("split")) {
        cfg.split.train = j.at("split").value("train", cfg.split.train);
        cfg.split.val = j.at("split").value("val", cfg.split.val);
    }
    if (j.contains("gen")) {
        const json& g = j.at("gen");
        cfg.gen.n_messages = g.value("n_messages", cfg.gen.n_messages);
        cfg.gen.tick_size = decimal_field(g, "tick_size", cfg.gen.tick_size);
        cfg.gen.initial_mid = decimal_field(g, "initial_mid", cfg.gen.initial_mid);
        cfg.gen.p_add = g.value("p_add", cfg.gen.p_add);
        cfg.gen.p_update = g.value("p_update", cfg.gen.p_update);
        cfg.gen.p_cancel = g.value("p_cancel", cfg.gen.p_cancel);
        cfg.gen.p_market = g.value("p_market", cfg.gen.p_market);
        cfg.gen.level_geometric_p = g.value("level_geometric_p", cfg.gen.level_geometric_p);
        cfg.gen.size_lognorm_mu = g.value("size_lognorm_mu", cfg.gen.size_lognorm_mu);
        cfg.gen.size_lognorm_sigma = g.value("size_lognorm_sigma", cfg.gen.size_lognorm_sigma);
        cfg.gen.signal_strength = g.value("signal_strength", cfg.gen.signal_strength);
        cfg.gen.signal_burst_length = g.value("signal_burst_length", cfg.gen.signal_burst_length);
        cfg.gen.n_days = g.value("n_days", cfg.gen.n_days);
        cfg.gen.instrument = g.value("instrument", cfg.gen.instrument);
    }
    if (!j.contains("models") || j.at("models").empty())
        throw ConfigError("config needs at least one model");
    for (const json& m : j.at("models")) {
        PipelineModel pm;
        pm.data = m.value("data", pm.data);
        pm.arch = nn::arch_from_name(m.value("arch", std::string("lm")));
        pm.layers = m.value("layers", pm.layers);
        pm.units = m.value("units", pm.units);
        pm.learning_rate = m.value("lr", pm.learning_rate);
        pm.batch_size = m.value("batch", pm.batch_size);
        pm.max_epochs = m.value("max_epochs", pm.max_epochs);
        pm.name = m.value("name", default_model_name(pm));
        cfg.models.push_back(pm);
    }
    return cfg;
}

std::string PipelineConfig::violation() const {
    if (auto why = gen.violation(); !why.empty()) return why;
    if (lookback < 1) return "lookback must be >= 1";
    if (horizon < 1) return "horizon must be >= 1";
    if (alpha && *alpha < 0.0) return "alpha must be >= 0";
    if (models.empty()) return "at least one model required";
    if (train_stride < 1) return "train_stride must be >= 1";
    std::set<std::string> names;
    for (const PipelineModel& m : models) {
        if (m.data != "mbo" && m.data != "lob") return "model data must be mbo or lob";
        if (!names.insert(m.name).second) return "duplicate model name " + m.name;
    }
    return {};
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    if (auto why = cfg.violation(); !why.empty()) throw ConfigError(why);
    fs::create_directories(cfg.out_dir);
    auto path = [&](const std::string& name) { return cfg.out_dir + "/" + name; };

    RunManifest manifest;
    manifest.subcommand = "pipeline";
    manifest.seed = cfg.seed;

    // 1. Generate the feed.
    SynthConfig gen_cfg = cfg.gen;
    gen_cfg.seed = cfg.seed;
    SynthFeed feed = generate_feed(gen_cfg);
    {
        FeedWriter writer(path("feed.csv"));
        for (const MboMessage& msg : feed.messages) writer.write(msg);
    }
    manifest.add_output(path("feed.csv"));

    // 2+3. Rebuild the book and extract the tick stream in one pass.
    bool want_lob = std::any_of(cfg.models.begin(), cfg.models.end(),
                                [](const PipelineModel& m) { return m.data == "lob"; });
    FeatureStream stream(gen_cfg.tick_size, want_lob);
    {
        SnapshotWriter snap_writer(path("snapshots.csv"));
        for (const MboMessage& msg : feed.messages) {
            stream.on_message(msg);
            snap_writer.write(stream.book().snapshot());
        }
    }
    manifest.add_output(path("snapshots.csv"));

    const std::vector<Tick>& ticks = stream.ticks();
    if (ticks.size() < static_cast<std::size_t>(cfg.lookback + 2 * cfg.horizon))
        throw DataError("tick stream too short for the configured lookback and horizon");

    TickSeries mbo_series;
    mbo_series.mode = "mbo";
    mbo_series.instrument = gen_cfg.instrument;
    mbo_series.tick_size = gen_cfg.tick_size;
    mbo_series.feature_width = kMboFeatureWidth;
    mbo_series.lookback = cfg.lookback;
    mbo_series.rows.reserve(ticks.size() * kMboFeatureWidth);
    for (const Tick& t : ticks) {
        mbo_series.rows.insert(mbo_series.rows.end(), t.mbo.begin(), t.mbo.end());
        mbo_series.day_index.push_back(t.day_index);
        mbo_series.mid.push_back(t.mid_price);
    }
    write_tick_series(mbo_series, path("windows_mbo.bin"));
    write_mids_csv(mbo_series, path("mids.csv"));
    manifest.add_output(path("windows_mbo.bin"));
    manifest.add_output(path("mids.csv"));

    TickSeries lob_raw;
    if (want_lob) {
        lob_raw.mode = "lob";
        lob_raw.instrument = gen_cfg.instrument;
        lob_raw.tick_size = gen_cfg.tick_size;
        lob_raw.feature_width = kLobFeatureWidth;
        lob_raw.lookback = cfg.lookback;
        lob_raw.day_index = mbo_series.day_index;
        lob_raw.mid = mbo_series.mid;
        lob_raw.rows.reserve(ticks.size() * kLobFeatureWidth);
        for (const auto& row : stream.lob_rows())
            lob_raw.rows.insert(lob_raw.rows.end(), row.begin(), row.end());
        write_tick_series(lob_raw, path("windows_lob.bin"));
        manifest.add_output(path("windows_lob.bin"));
    }

    // 4. Labels: calibrate alpha on training days unless pinned.
    DaySplit days = day_split(mbo_series.day_index, cfg.split);
    std::vector<LabeledTick> l_values =
        l_values_series(mbo_series.mid, mbo_series.day_index, cfg.horizon);
    double alpha;
    if (cfg.alpha) {
        alpha = *cfg.alpha;
    } else {
        std::vector<double> train_l;
        for (const LabeledTick& lt : l_values)
            if (days.which(lt.day_index) == 0) train_l.push_back(lt.l_value);
        alpha = calibrate_alpha(train_l);
    }
    std::vector<LabeledTick> labels = l_values;
    for (LabeledTick& lt : labels) lt.label = classify(lt.l_value, alpha);
    write_labels_csv(labels, path("labels.csv"));
    manifest.add_output(path("labels.csv"));

    // 5. Samples and splits.
    SampleSet mbo_all = make_samples(mbo_series, labels, cfg.lookback);
    Splits mbo_splits = split_by_day(mbo_all, cfg.split);

    LobStats lob_stats;
    TickSeries lob_norm;
    Splits lob_splits;
    if (want_lob) {
        // Statistics from training-day rows only.
        std::size_t train_end = 0;
        while (train_end < lob_raw.size() && days.which(lob_raw.day_index[train_end]) == 0)
            ++train_end;
        if (train_end == 0) throw DataError("no training rows for LOB statistics");
        std::vector<std::array<double, kLobFeatureWidth>> raw_rows(lob_raw.size());
        for (std::size_t i = 0; i < lob_raw.size(); ++i)
            std::copy_n(lob_raw.row(i), kLobFeatureWidth, raw_rows[i].begin());
        lob_stats = fit_lob_stats(raw_rows, 0, train_end);
        lob_norm = apply_lob_stats(lob_raw, lob_stats);
        SampleSet lob_all = make_samples(lob_norm, labels, cfg.lookback);
        lob_splits = split_by_day(lob_all, cfg.split);
    }

    // 6. Train, predict, evaluate each model.
    json report;
    report["schema_version"] = 1;
    report["tool_version"] = kToolVersion;
    report["seed"] = cfg.seed;
    report["horizon"] = cfg.horizon;
    report["alpha"] = alpha;
    report["alpha_calibrated"] = !cfg.alpha.has_value();
    report["lookback"] = cfg.lookback;
    report["samples"] = {{"train", mbo_splits.train.size()},
                         {"val", mbo_splits.val.size()},
                         {"test", mbo_splits.test.size()}};
    report["class_balance"] = {{"train", balance_json(sample_balance(mbo_splits.train))},
                               {"val", balance_json(sample_balance(mbo_splits.val))},
                               {"test", balance_json(sample_balance(mbo_splits.test))}};

    PipelineResult result;
    result.feed_path = path("feed.csv");

    struct ModelOutput {
        std::string name;
        std::string data;
        nn::Arch arch;
        std::vector<std::array<double, 3>> probs;
    };
    std::vector<ModelOutput> outputs;
    const std::vector<int>& truth = mbo_splits.test.label;
    std::vector<std::int32_t> test_days;
    for (std::size_t i = 0; i < mbo_splits.test.size(); ++i)
        test_days.push_back(mbo_splits.test.day(i));

    json models_json = json::object();
    for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
        const PipelineModel& pm = cfg.models[mi];
        const Splits& splits = pm.data == "lob" ? lob_splits : mbo_splits;
        const TickSeries& series = pm.data == "lob" ? lob_norm : mbo_series;

        TrainConfig tc;
        tc.model.arch = pm.arch;
        tc.model.lookback = cfg.lookback;
        tc.model.feature_width = series.feature_width;
        tc.model.layers = pm.layers;
        tc.model.units = pm.units;
        tc.learning_rate = pm.learning_rate;
        tc.batch_size = pm.batch_size;
        tc.max_epochs = pm.max_epochs;
        tc.seed = cfg.seed + 1000 * (mi + 1);
        tc.threads = cfg.threads;

        SampleSet train_set = strided(splits.train, cfg.train_stride);
        FitResult run = fit(tc, train_set, splits.val);
        if (pm.data == "lob") {
            run.checkpoint.norm_mean.assign(lob_stats.mean.begin(), lob_stats.mean.end());
            run.checkpoint.norm_std.assign(lob_stats.stddev.begin(), lob_stats.stddev.end());
        }
        std::string ckpt_dir = path("ckpt_" + pm.name);
        run.checkpoint.save(ckpt_dir);
        result.checkpoint_dirs.push_back(ckpt_dir);
        manifest.add_output(ckpt_dir + "/manifest.json");
        manifest.add_output(ckpt_dir + "/tensors.bin");

        std::vector<std::array<double, 3>> probs =
            predict(run.checkpoint, series, splits.test.end_tick, cfg.threads);
        std::string probs_path = path("probs_" + pm.name + ".csv");
        write_probs_csv(probs_path, splits.test.end_tick, probs);
        manifest.add_output(probs_path);

        std::vector<int> pred = argmax_classes(probs);
        json mj;
        mj["data"] = pm.data;
        mj["arch"] = nn::arch_name(pm.arch);
        mj["param_count"] = tc.model.param_count();
        mj["best_epoch"] = run.checkpoint.best_epoch;
        mj["epochs_run"] = run.epochs_run;
        mj["metrics"] = metrics_json(metrics(pred, truth));
        mj["confusion"] = confusion_json(confusion(pred, truth));
        mj["daily"] = daily_json(daily_accuracy(pred, truth, test_days));
        models_json[pm.name] = mj;

        outputs.push_back(ModelOutput{pm.name, pm.data, pm.arch, std::move(probs)});
    }

    // 7. Equal-weight ensembles mirroring the standard combinations.
    std::vector<std::vector<std::array<double, 3>>> ens_mbo_members;
    std::vector<std::vector<std::array<double, 3>>> ens_lob_members;
    for (const ModelOutput& out : outputs) {
        if (out.data == "mbo" && (out.arch == nn::Arch::kLstm || out.arch == nn::Arch::kAttention))
            ens_mbo_members.push_back(out.probs);
        if (out.data == "lob") ens_lob_members.push_back(out.probs);
    }
    std::vector<ModelOutput> ensembles;
    if (ens_mbo_members.size() >= 2)
        ensembles.push_back(
            ModelOutput{"Ensemble-MBO", "mbo", nn::Arch::kLstm, ensemble(ens_mbo_members)});
    if (!ens_lob_members.empty())
        ensembles.push_back(
            ModelOutput{"Ensemble-LOB", "lob", nn::Arch::kLstm, ensemble(ens_lob_members)});
    if (ensembles.size() == 2)
        ensembles.push_back(ModelOutput{
            "Ensemble-MBO-LOB", "both", nn::Arch::kLstm,
            ensemble({ensembles[0].probs, ensembles[1].probs})});

    json ens_json = json::object();
    for (const ModelOutput& e : ensembles) {
        std::vector<int> pred = argmax_classes(e.probs);
        json ej;
        ej["metrics"] = metrics_json(metrics(pred, truth));
        ej["confusion"] = confusion_json(confusion(pred, truth));
        ej["daily"] = daily_json(daily_accuracy(pred, truth, test_days));
        ens_json[e.name] = ej;
        std::string probs_path = path("probs_" + e.name + ".csv");
        write_probs_csv(probs_path, mbo_splits.test.end_tick, e.probs);
        manifest.add_output(probs_path);
    }

    // Signal correlation and KS significance across everything produced.
    std::vector<ModelOutput> all_outputs = outputs;
    all_outputs.insert(all_outputs.end(), ensembles.begin(), ensembles.end());
    std::vector<std::string> names;
    std::vector<std::vector<double>> signals;
    for (const ModelOutput& out : all_outputs) {
        names.push_back(out.name);
        signals.push_back(directional_signal(out.probs));
    }
    CorrelationMatrix corr = pearson_matrix(names, signals);
    json corr_json;
    corr_json["names"] = corr.names;
    corr_json["matrix"] = corr.r;
    report["pearson"] = corr_json;

    json ks_json = json::array();
    for (std::size_t i = 0; i < all_outputs.size(); ++i)
        for (std::size_t j = i + 1; j < all_outputs.size(); ++j) {
            DailyAccuracy da_i = daily_accuracy(argmax_classes(all_outputs[i].probs), truth,
                                                test_days);
            DailyAccuracy da_j = daily_accuracy(argmax_classes(all_outputs[j].probs), truth,
                                                test_days);
            KsResult ks = ks_statistic(da_i.accuracy, da_j.accuracy);
            ks_json.push_back({{"a", all_outputs[i].name},
                               {"b", all_outputs[j].name},
                               {"d", ks.d},
                               {"p_value", ks.p_value}});
        }
    report["ks_daily_accuracy"] = ks_json;

    report["models"] = models_json;
    report["ensembles"] = ens_json;

    result.report_path = path("report.json");
    {
        std::ofstream out(result.report_path);
        if (!out) throw IoError("cannot write " + result.report_path);
        out << report.dump(2) << '\n';
    }
    manifest.add_output(result.report_path);
    manifest.write(path("run_manifest.json"));
    return result;
}

}  // namespace mbo
