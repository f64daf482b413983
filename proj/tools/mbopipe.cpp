// mbopipe — market-by-order toolkit: synthetic feeds, book reconstruction,
// feature/label extraction, model training and evaluation, wired end to
// end by the `pipeline` subcommand.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mbo/dataset.hpp"
#include "mbo/errors.hpp"
#include "mbo/eval.hpp"
#include "mbo/feed_io.hpp"
#include "mbo/manifest.hpp"
#include "mbo/pipeline.hpp"
#include "mbo/report_json.hpp"
#include "mbo/synth.hpp"
#include "mbo/timestamp.hpp"
#include "mbo/train.hpp"

namespace {

using namespace mbo;
using nlohmann::json;

struct ProbsFile {
    std::string name;
    std::vector<std::size_t> tick_index;
    std::vector<std::array<double, 3>> probs;
};

ProbsFile read_probs_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("tick_index,p_down,p_stationary,p_up", 0) != 0)
        throw ParseError(path + ": expected probs header");
    ProbsFile pf;
    pf.name = std::filesystem::path(path).stem().string();
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        auto fields = split_csv(line);
        if (fields.size() != 4) throw ParseError(path + " row " + std::to_string(row));
        pf.tick_index.push_back(std::stoull(std::string(fields[0])));
        std::array<double, 3> p{std::stod(std::string(fields[1])),
                                std::stod(std::string(fields[2])),
                                std::stod(std::string(fields[3]))};
        pf.probs.push_back(p);
    }
    return pf;
}

Decimal parse_decimal_arg(const std::string& text, const char* what) {
    Decimal d;
    if (!Decimal::parse(text, d) || d.raw() <= 0)
        throw ConfigError(std::string(what) + " must be a positive decimal, got '" + text + "'");
    return d;
}

void write_ensemble_csv(const std::string& path, const ProbsFile& out) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    os << "tick_index,p_down,p_stationary,p_up\n";
    char buf[128];
    for (std::size_t i = 0; i < out.tick_index.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g", out.tick_index[i],
                      out.probs[i][0], out.probs[i][1], out.probs[i][2]);
        os << buf << '\n';
    }
}

int run(int argc, char** argv) {
    CLI::App app{"market-by-order prediction pipeline"};
    app.require_subcommand(1);

    // ---- gen ----------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a seeded synthetic MBO feed");
    std::uint64_t gen_seed = 42;
    std::size_t gen_n = 100000;
    std::string gen_tick = "0.01", gen_mid = "100.00", gen_out, gen_instrument = "SYNTH";
    double gen_signal = 0.0;
    int gen_burst = 25, gen_days = 8;
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--n", gen_n, "number of messages")->required();
    gen->add_option("--tick-size", gen_tick, "instrument tick size");
    gen->add_option("--initial-mid", gen_mid, "starting mid price");
    gen->add_option("--signal-strength", gen_signal, "planted signal strength in [0,1]");
    gen->add_option("--burst-length", gen_burst, "minimum drift length in ticks");
    gen->add_option("--days", gen_days, "number of trading days");
    gen->add_option("--instrument", gen_instrument, "instrument name");
    gen->add_option("--out", gen_out, "output feed CSV")->required();

    // ---- rebuild ------------------------------------------------------------
    auto* rebuild = app.add_subcommand("rebuild", "replay a feed into depth-10 snapshots");
    std::string rb_feed, rb_out, rb_tick = "0.01";
    rebuild->add_option("--feed", rb_feed, "input feed CSV")->required();
    rebuild->add_option("--tick-size", rb_tick, "instrument tick size");
    rebuild->add_option("--out", rb_out, "output snapshot CSV")->required();

    // ---- featurize ----------------------------------------------------------
    auto* feat = app.add_subcommand("featurize", "normalised feature stream from a feed");
    std::string ft_feed, ft_out, ft_tick = "0.01", ft_mode = "mbo", ft_mids, ft_instrument = "SYNTH";
    int ft_lookback = kDefaultLookback;
    feat->add_option("--feed", ft_feed, "input feed CSV")->required();
    feat->add_option("--tick-size", ft_tick, "instrument tick size");
    feat->add_option("--mode", ft_mode, "mbo or lob")->check(CLI::IsMember({"mbo", "lob"}));
    feat->add_option("--lookback", ft_lookback, "window length T");
    feat->add_option("--instrument", ft_instrument, "instrument name");
    feat->add_option("--out", ft_out, "output windows file (.bin; sidecar .bin.json)")->required();
    feat->add_option("--mids-out", ft_mids, "mid series CSV (default <out>.mids.csv)");

    // ---- label --------------------------------------------------------------
    auto* label = app.add_subcommand("label", "smooth labels from a mid series");
    std::string lb_mids, lb_out;
    int lb_k = 20;
    double lb_alpha = -1.0;
    bool lb_calibrate = false;
    double lb_train_frac = 0.5, lb_val_frac = 0.25;
    label->add_option("--mids", lb_mids, "mid series CSV")->required();
    label->add_option("--k", lb_k, "prediction horizon in ticks")
        ->check(CLI::IsMember({20, 50, 100}));
    auto* alpha_opt = label->add_option("--alpha", lb_alpha, "label threshold");
    auto* cal_flag = label->add_flag("--calibrate", lb_calibrate,
                                     "calibrate alpha for class balance on the training days");
    alpha_opt->excludes(cal_flag);
    label->add_option("--train-frac", lb_train_frac, "training day fraction for calibration");
    label->add_option("--val-frac", lb_val_frac, "validation day fraction");
    label->add_option("--out", lb_out, "output labels CSV")->required();

    // ---- train --------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "fit one model on labelled windows");
    std::string tr_windows, tr_labels, tr_arch = "lm", tr_out;
    double tr_lr = 1e-4;
    int tr_batch = 128, tr_units = 32, tr_layers = 1, tr_max_epochs = 200, tr_patience = 10;
    int tr_threads = 0, tr_stride = 1;
    std::uint64_t tr_seed = 0;
    double tr_train_frac = 0.5, tr_val_frac = 0.25;
    train_cmd->add_option("--windows", tr_windows, "windows .bin from featurize")->required();
    train_cmd->add_option("--labels", tr_labels, "labels CSV")->required();
    train_cmd->add_option("--arch", tr_arch, "lm|mlp|lstm|attention")
        ->check(CLI::IsMember({"lm", "mlp", "lstm", "attention"}));
    train_cmd->add_option("--lr", tr_lr, "learning rate");
    train_cmd->add_option("--batch", tr_batch, "minibatch size");
    train_cmd->add_option("--units", tr_units, "units per layer");
    train_cmd->add_option("--layers", tr_layers, "hidden layers");
    train_cmd->add_option("--seed", tr_seed, "RNG seed");
    train_cmd->add_option("--max-epochs", tr_max_epochs, "epoch cap");
    train_cmd->add_option("--patience", tr_patience, "early stopping patience");
    train_cmd->add_option("--threads", tr_threads, "worker threads (0 = auto)");
    train_cmd->add_option("--train-stride", tr_stride, "subsample training windows");
    train_cmd->add_option("--train-frac", tr_train_frac, "training day fraction");
    train_cmd->add_option("--val-frac", tr_val_frac, "validation day fraction");
    train_cmd->add_option("--out", tr_out, "checkpoint directory")->required();

    // ---- predict ------------------------------------------------------------
    auto* predict_cmd = app.add_subcommand("predict", "class probabilities for every window");
    std::string pr_ckpt, pr_windows, pr_out;
    int pr_threads = 0;
    predict_cmd->add_option("--ckpt", pr_ckpt, "checkpoint directory")->required();
    predict_cmd->add_option("--windows", pr_windows, "windows .bin")->required();
    predict_cmd->add_option("--threads", pr_threads, "worker threads (0 = auto)");
    predict_cmd->add_option("--out", pr_out, "output probabilities CSV")->required();

    // ---- eval ---------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "metric suite over prediction files");
    std::vector<std::string> ev_probs;
    std::string ev_labels, ev_dates, ev_report;
    eval_cmd->add_option("--probs", ev_probs, "probability CSVs, one per model")
        ->required()
        ->expected(-1);
    eval_cmd->add_option("--labels", ev_labels, "labels CSV")->required();
    eval_cmd->add_option("--dates", ev_dates, "tick date CSV (mids.csv works)")->required();
    eval_cmd->add_option("--report", ev_report, "output report JSON")->required();

    // ---- ensemble -----------------------------------------------------------
    auto* ens_cmd = app.add_subcommand("ensemble", "equal-weight mean of probability files");
    std::vector<std::string> en_probs;
    std::string en_out;
    ens_cmd->add_option("--probs", en_probs, "probability CSVs")->required()->expected(-1);
    ens_cmd->add_option("--out", en_out, "output CSV")->required();

    // ---- pipeline -----------------------------------------------------------
    auto* pipe_cmd = app.add_subcommand("pipeline", "run the full chain from one config");
    std::string pp_config, pp_out;
    std::int64_t pp_seed = -1;
    pipe_cmd->add_option("--config", pp_config, "pipeline config JSON")->required();
    pipe_cmd->add_option("--seed", pp_seed, "override the config seed");
    pipe_cmd->add_option("--out", pp_out, "override the config out_dir");

    CLI11_PARSE(app, argc, argv);

    auto started = std::chrono::steady_clock::now();
    RunManifest manifest;
    for (int i = 1; i < argc; ++i) manifest.args.push_back(argv[i]);
    std::string manifest_path;

    if (*gen) {
        SynthConfig cfg;
        cfg.seed = gen_seed;
        cfg.n_messages = gen_n;
        cfg.tick_size = parse_decimal_arg(gen_tick, "--tick-size");
        cfg.initial_mid = parse_decimal_arg(gen_mid, "--initial-mid");
        cfg.signal_strength = gen_signal;
        cfg.signal_burst_length = gen_burst;
        cfg.n_days = gen_days;
        cfg.instrument = gen_instrument;
        SynthFeed feed = generate_feed(cfg);
        FeedWriter writer(gen_out);
        for (const MboMessage& msg : feed.messages) writer.write(msg);
        std::cout << "wrote " << feed.messages.size() << " messages to " << gen_out << "\n";
        manifest.subcommand = "gen";
        manifest.seed = gen_seed;
        manifest.add_output(gen_out);
        manifest_path = gen_out + ".manifest.json";
    } else if (*rebuild) {
        LimitOrderBook book(parse_decimal_arg(rb_tick, "--tick-size"));
        FeedReader reader(rb_feed);
        SnapshotWriter writer(rb_out);
        MboMessage msg;
        std::size_t rows = 0;
        while (reader.next(msg)) {
            book.apply_message(msg);
            writer.write(book.snapshot());
            ++rows;
        }
        std::cout << "wrote " << rows << " snapshots to " << rb_out << "\n";
        manifest.subcommand = "rebuild";
        manifest.add_input(rb_feed);
        manifest.add_output(rb_out);
        manifest_path = rb_out + ".manifest.json";
    } else if (*feat) {
        FeatureStream stream(parse_decimal_arg(ft_tick, "--tick-size"), ft_mode == "lob");
        FeedReader reader(ft_feed);
        MboMessage msg;
        while (reader.next(msg)) stream.on_message(msg);

        TickSeries series;
        series.mode = ft_mode;
        series.instrument = ft_instrument;
        series.tick_size = parse_decimal_arg(ft_tick, "--tick-size");
        series.lookback = ft_lookback;
        series.feature_width = ft_mode == "lob" ? kLobFeatureWidth : kMboFeatureWidth;
        for (const Tick& t : stream.ticks()) {
            series.day_index.push_back(t.day_index);
            series.mid.push_back(t.mid_price);
        }
        if (ft_mode == "lob") {
            for (const auto& row : stream.lob_rows())
                series.rows.insert(series.rows.end(), row.begin(), row.end());
        } else {
            for (const Tick& t : stream.ticks())
                series.rows.insert(series.rows.end(), t.mbo.begin(), t.mbo.end());
        }
        write_tick_series(series, ft_out);
        std::string mids_path = ft_mids.empty() ? ft_out + ".mids.csv" : ft_mids;
        write_mids_csv(series, mids_path);
        std::cout << "wrote " << series.size() << " tick rows to " << ft_out << "\n";
        manifest.subcommand = "featurize";
        manifest.add_input(ft_feed);
        manifest.add_output(ft_out);
        manifest.add_output(ft_out + ".json");
        manifest.add_output(mids_path);
        manifest_path = ft_out + ".manifest.json";
    } else if (*label) {
        MidsFile mids = read_mids_csv(lb_mids);
        double alpha;
        if (lb_calibrate) {
            DaySplit days = day_split(mids.day_index, SplitFractions{lb_train_frac, lb_val_frac});
            std::vector<LabeledTick> ls = l_values_series(mids.mid, mids.day_index, lb_k);
            std::vector<double> train_l;
            for (const LabeledTick& lt : ls)
                if (days.which(lt.day_index) == 0) train_l.push_back(lt.l_value);
            alpha = calibrate_alpha(train_l);
            std::cout << "calibrated alpha = " << alpha << "\n";
        } else {
            if (lb_alpha < 0.0) throw ConfigError("provide --alpha or --calibrate");
            alpha = lb_alpha;
        }
        std::vector<LabeledTick> labels = label_series(mids.mid, mids.day_index, lb_k, alpha);
        write_labels_csv(labels, lb_out);
        std::cout << "wrote " << labels.size() << " labels to " << lb_out << "\n";
        manifest.subcommand = "label";
        manifest.add_input(lb_mids);
        manifest.add_output(lb_out);
        manifest_path = lb_out + ".manifest.json";
    } else if (*train_cmd) {
        TickSeries series = read_tick_series(tr_windows);
        std::vector<LabeledTick> labels = read_labels_csv(tr_labels);
        SampleSet all = make_samples(series, labels, series.lookback);
        Splits splits = split_by_day(all, SplitFractions{tr_train_frac, tr_val_frac});

        TrainConfig tc;
        tc.model.arch = nn::arch_from_name(tr_arch);
        tc.model.lookback = series.lookback;
        tc.model.feature_width = series.feature_width;
        tc.model.layers = tr_layers;
        tc.model.units = tr_units;
        tc.learning_rate = tr_lr;
        tc.batch_size = tr_batch;
        tc.max_epochs = tr_max_epochs;
        tc.patience = tr_patience;
        tc.seed = tr_seed;
        tc.threads = tr_threads;

        SampleSet train_set = splits.train;
        if (tr_stride > 1) {
            SampleSet sub;
            sub.series = train_set.series;
            sub.lookback = train_set.lookback;
            for (std::size_t i = 0; i < train_set.size();
                 i += static_cast<std::size_t>(tr_stride)) {
                sub.end_tick.push_back(train_set.end_tick[i]);
                sub.label.push_back(train_set.label[i]);
            }
            train_set = sub;
        }
        FitResult run = fit(tc, train_set, splits.val);
        run.checkpoint.save(tr_out);
        const auto& hist = run.checkpoint.history;
        std::cout << "trained " << run.epochs_run << " epochs; best epoch "
                  << run.checkpoint.best_epoch << " val loss "
                  << hist[static_cast<std::size_t>(run.checkpoint.best_epoch - 1)].val_loss
                  << "; saved to " << tr_out << "\n";
        manifest.subcommand = "train";
        manifest.seed = tr_seed;
        manifest.add_input(tr_windows);
        manifest.add_input(tr_labels);
        manifest.add_output(tr_out + "/manifest.json");
        manifest.add_output(tr_out + "/tensors.bin");
        manifest_path = tr_out + "/run_manifest.json";
    } else if (*predict_cmd) {
        nn::Checkpoint ckpt = nn::Checkpoint::load(pr_ckpt);
        TickSeries series = read_tick_series(pr_windows);
        if (!ckpt.norm_mean.empty()) {
            if (static_cast<int>(ckpt.norm_mean.size()) != series.feature_width)
                throw DataError("checkpoint normalisation width mismatch");
            for (std::size_t i = 0; i < series.size(); ++i)
                for (int c = 0; c < series.feature_width; ++c) {
                    double& x = series.rows[i * static_cast<std::size_t>(series.feature_width) +
                                            static_cast<std::size_t>(c)];
                    x = (x - ckpt.norm_mean[static_cast<std::size_t>(c)]) /
                        ckpt.norm_std[static_cast<std::size_t>(c)];
                }
        }
        std::vector<std::size_t> ends =
            window_end_indices(series.day_index, ckpt.params.spec().lookback);
        auto probs = predict(ckpt, series, ends, pr_threads);
        ProbsFile pf;
        pf.tick_index = ends;
        pf.probs = probs;
        write_ensemble_csv(pr_out, pf);
        std::cout << "wrote " << probs.size() << " prediction rows to " << pr_out << "\n";
        manifest.subcommand = "predict";
        manifest.add_input(pr_windows);
        manifest.add_output(pr_out);
        manifest_path = pr_out + ".manifest.json";
    } else if (*eval_cmd) {
        std::vector<LabeledTick> labels = read_labels_csv(ev_labels);
        MidsFile dates = read_mids_csv(ev_dates);
        std::unordered_map<std::size_t, int> truth_by_tick;
        for (const LabeledTick& lt : labels)
            truth_by_tick[lt.tick_index] = static_cast<int>(lt.label);
        std::unordered_map<std::size_t, std::int32_t> day_by_tick;
        for (std::size_t i = 0; i < dates.tick_index.size(); ++i)
            day_by_tick[dates.tick_index[i]] = dates.day_index[i];

        json report;
        report["schema_version"] = 1;
        report["tool_version"] = kToolVersion;
        json models = json::object();
        std::vector<std::string> names;
        std::vector<std::vector<double>> signals;
        std::vector<std::vector<double>> daily_lists;
        for (const std::string& path : ev_probs) {
            ProbsFile pf = read_probs_csv(path);
            std::vector<int> pred, truth;
            std::vector<std::int32_t> days;
            std::vector<std::array<double, 3>> joined;
            for (std::size_t i = 0; i < pf.tick_index.size(); ++i) {
                auto it = truth_by_tick.find(pf.tick_index[i]);
                auto dit = day_by_tick.find(pf.tick_index[i]);
                if (it == truth_by_tick.end() || dit == day_by_tick.end()) continue;
                joined.push_back(pf.probs[i]);
                truth.push_back(it->second);
                days.push_back(dit->second);
            }
            if (joined.empty()) throw DataError(path + ": no ticks align with the labels");
            pred = argmax_classes(joined);
            json mj;
            mj["n"] = joined.size();
            mj["metrics"] = metrics_json(metrics(pred, truth));
            mj["confusion"] = confusion_json(confusion(pred, truth));
            DailyAccuracy da = daily_accuracy(pred, truth, days);
            mj["daily"] = daily_json(da);
            models[pf.name] = mj;
            names.push_back(pf.name);
            signals.push_back(directional_signal(joined));
            daily_lists.push_back(da.accuracy);
        }
        report["models"] = models;
        CorrelationMatrix corr = pearson_matrix(names, signals);
        report["pearson"] = {{"names", corr.names}, {"matrix", corr.r}};
        json ks_json = json::array();
        for (std::size_t i = 0; i < names.size(); ++i)
            for (std::size_t j = i + 1; j < names.size(); ++j) {
                KsResult ks = ks_statistic(daily_lists[i], daily_lists[j]);
                ks_json.push_back(
                    {{"a", names[i]}, {"b", names[j]}, {"d", ks.d}, {"p_value", ks.p_value}});
            }
        report["ks_daily_accuracy"] = ks_json;
        std::ofstream out(ev_report);
        if (!out) throw IoError("cannot write " + ev_report);
        out << report.dump(2) << '\n';
        std::cout << "wrote report to " << ev_report << "\n";
        manifest.subcommand = "eval";
        for (const std::string& p : ev_probs) manifest.add_input(p);
        manifest.add_input(ev_labels);
        manifest.add_output(ev_report);
        manifest_path = ev_report + ".manifest.json";
    } else if (*ens_cmd) {
        std::vector<ProbsFile> files;
        for (const std::string& p : en_probs) files.push_back(read_probs_csv(p));
        for (std::size_t i = 1; i < files.size(); ++i)
            if (files[i].tick_index != files[0].tick_index)
                throw DataError("probability files are not aligned on tick_index");
        std::vector<std::vector<std::array<double, 3>>> members;
        for (const ProbsFile& f : files) members.push_back(f.probs);
        ProbsFile out;
        out.tick_index = files[0].tick_index;
        out.probs = ensemble(members);
        write_ensemble_csv(en_out, out);
        std::cout << "wrote ensemble of " << files.size() << " models to " << en_out << "\n";
        manifest.subcommand = "ensemble";
        for (const std::string& p : en_probs) manifest.add_input(p);
        manifest.add_output(en_out);
        manifest_path = en_out + ".manifest.json";
    } else if (*pipe_cmd) {
        PipelineConfig cfg = PipelineConfig::from_json_file(pp_config);
        if (pp_seed >= 0) cfg.seed = static_cast<std::uint64_t>(pp_seed);
        if (!pp_out.empty()) cfg.out_dir = pp_out;
        PipelineResult result = run_pipeline(cfg);
        std::cout << "pipeline complete; report at " << result.report_path << "\n";
        // run_pipeline writes its own manifest inside out_dir.
        return 0;
    }

    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    manifest.duration_ms = elapsed;
    if (!manifest_path.empty()) manifest.write(manifest_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mbo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 64;
    } catch (const mbo::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 66;
    } catch (const mbo::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 65;
    } catch (const mbo::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 65;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 70;
    }
}
