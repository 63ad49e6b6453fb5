#include "hipcap/cli/app.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "hipcap/data/dataset.hpp"
#include "hipcap/data/sceneworld.hpp"
#include "hipcap/error.hpp"
#include "hipcap/hierarchy/tree.hpp"
#include "hipcap/metrics/report.hpp"
#include "hipcap/training/experiments.hpp"
#include "hipcap/training/pipeline_check.hpp"
#include "hipcap/training/recognition.hpp"
#include "hipcap/training/trainer.hpp"

namespace hipcap::cli {
namespace {

struct ModelFlags {
    double epsilon = 0.1;
    bool use_gcn = false;
    bool no_regions = false;
    bool no_instances = false;
    bool no_treelstm = false;
    std::size_t encoder_hidden = 500;
    std::size_t decoder_hidden = 1000;
    std::size_t embed = 256;
    std::size_t attention = 512;
    std::size_t max_len = 20;
    std::size_t k_fallback = 2;
    std::size_t relation_labels = 5;

    ModelConfig config() const {
        ModelConfig c;
        c.epsilon = epsilon;
        c.flags.use_gcn = use_gcn;
        c.flags.use_regions = !no_regions;
        c.flags.use_instances = !no_instances;
        c.flags.use_treelstm = !no_treelstm;
        c.encoder_hidden = encoder_hidden;
        c.decoder_hidden = decoder_hidden;
        c.embed = embed;
        c.attention = attention;
        c.max_len = max_len;
        c.k_fallback = k_fallback;
        c.relation_labels = relation_labels;
        return c;
    }
};

struct TrainFlags {
    std::size_t epochs = 30;
    double lr = 5e-4;
    std::size_t batch_size = 50;
    std::uint64_t seed = 0;
    std::size_t beam = 3;
    std::size_t min_count = 5;

    TrainConfig config() const {
        TrainConfig c;
        c.epochs = epochs;
        c.lr = lr;
        c.batch_size = batch_size;
        c.seed = seed;
        c.beam = beam;
        return c;
    }
};

void add_model_flags(CLI::App* app, ModelFlags& f) {
    app->add_option("--epsilon", f.epsilon, "IoU threshold for nesting regions")->check(CLI::Range(0.0, 0.999999));
    app->add_flag("--use-gcn", f.use_gcn, "Enrich features with the relation graph");
    app->add_flag("--no-regions", f.no_regions, "Drop region features from the decoder");
    app->add_flag("--no-instances", f.no_instances, "Drop instance features from the decoder");
    app->add_flag("--no-treelstm", f.no_treelstm, "Drop Tree-LSTM features from the decoder");
    app->add_option("--encoder-hidden", f.encoder_hidden, "Tree-LSTM hidden size")->check(CLI::PositiveNumber);
    app->add_option("--decoder-hidden", f.decoder_hidden, "Decoder LSTM hidden size")->check(CLI::PositiveNumber);
    app->add_option("--embed", f.embed, "Word embedding size")->check(CLI::PositiveNumber);
    app->add_option("--attention", f.attention, "Attention size")->check(CLI::PositiveNumber);
    app->add_option("--max-len", f.max_len, "Maximum caption length")->check(CLI::PositiveNumber);
    app->add_option("--k-fallback", f.k_fallback, "Nearest neighbours per region when a scene has no edges");
    app->add_option("--relation-labels", f.relation_labels, "Relation label count for the GCN")
        ->check(CLI::PositiveNumber);
}

void add_train_flags(CLI::App* app, TrainFlags& f) {
    app->add_option("--epochs", f.epochs, "Training epochs");
    app->add_option("--lr", f.lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
    app->add_option("--batch-size", f.batch_size, "Scenes per batch")->check(CLI::PositiveNumber);
    app->add_option("--seed", f.seed, "Seed for initialization and batch order");
    app->add_option("--beam", f.beam, "Beam size for validation decoding")->check(CLI::PositiveNumber);
    app->add_option("--min-count", f.min_count, "Minimum token count kept in the vocabulary")
        ->check(CLI::PositiveNumber);
}

// Output file or the command's stdout.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw IoError("cannot open " + path + " for writing");
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : fallback_; }
    void close(const std::string& path) {
        if (!file_.is_open()) return;
        file_.close();
        if (!file_) throw IoError("failed writing " + path);
    }

private:
    std::ofstream file_;
    std::ostream& fallback_;
};

std::vector<const SceneRecord*> pick_split(const std::vector<SceneRecord>& data, const std::string& split) {
    if (split.empty() || split == "all") {
        std::vector<const SceneRecord*> all;
        for (const auto& r : data) all.push_back(&r);
        return all;
    }
    return select_split(data, split);
}

std::string format_score(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Candidate captions: "image_id<TAB>caption[<TAB>label,label,...]" per line.
struct Candidate {
    std::string caption;
    std::optional<std::vector<std::size_t>> labels;
};

std::map<std::string, Candidate> read_candidates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open candidates file " + path);
    std::map<std::string, Candidate> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw InputError(path + ":" + std::to_string(line_no) + ": expected image_id<TAB>caption");
        }
        Candidate c;
        const std::string id = line.substr(0, tab);
        std::string rest = line.substr(tab + 1);
        const auto tab2 = rest.find('\t');
        if (tab2 != std::string::npos) {
            std::vector<std::size_t> labels;
            std::stringstream ls(rest.substr(tab2 + 1));
            std::string item;
            while (std::getline(ls, item, ',')) {
                if (item.empty()) continue;
                try {
                    labels.push_back(static_cast<std::size_t>(std::stoul(item)));
                } catch (const std::exception&) {
                    throw InputError(path + ":" + std::to_string(line_no) + ": bad label '" + item + "'");
                }
            }
            c.labels = std::move(labels);
            rest = rest.substr(0, tab2);
        }
        c.caption = rest;
        if (!out.emplace(id, std::move(c)).second) {
            throw InputError(path + ":" + std::to_string(line_no) + ": duplicate image id " + id);
        }
    }
    return out;
}

std::size_t label_classes(const std::vector<SceneRecord>& data) {
    std::size_t c = 0;
    for (const auto& r : data) {
        if (!r.labels) continue;
        for (auto l : *r.labels) c = std::max(c, l + 1);
    }
    return c;
}

void print_scores(std::ostream& out, const CaptionReport& r, const MultilabelScores* rec) {
    for (int n = 0; n < 4; ++n) out << "BLEU-" << n + 1 << ' ' << format_score(r.bleu[n]) << '\n';
    out << "ROUGE-L " << format_score(r.rouge_l) << '\n';
    out << "CIDEr-D " << format_score(r.cider_d) << '\n';
    if (rec) {
        out << "C-P " << format_score(rec->class_precision) << '\n';
        out << "C-R " << format_score(rec->class_recall) << '\n';
        out << "C-F1 " << format_score(rec->class_f1) << '\n';
        out << "O-P " << format_score(rec->overall_precision) << '\n';
        out << "O-R " << format_score(rec->overall_recall) << '\n';
        out << "O-F1 " << format_score(rec->overall_f1) << '\n';
    }
}

std::string recognition_json(const MultilabelScores& s) {
    nlohmann::ordered_json j{{"C-P", s.class_precision},   {"C-R", s.class_recall},   {"C-F1", s.class_f1},
                             {"O-P", s.overall_precision}, {"O-R", s.overall_recall}, {"O-F1", s.overall_f1}};
    return j.dump();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"hipcap: hierarchy-parsing image captioning", "hipcap"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::function<void()> action;

    // generate
    std::string gen_out;
    std::uint64_t gen_seed = 0;
    std::size_t gen_scenes = 600;
    SceneWorldConfig gen_cfg;
    gen_cfg.val_count = 100;
    auto* gen = app.add_subcommand("generate", "Write a synthetic scene-world dataset");
    gen->add_option("--out", gen_out, "Output JSON Lines file")->required();
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--scenes", gen_scenes, "Number of scenes")->check(CLI::PositiveNumber);
    gen->add_option("--val", gen_cfg.val_count, "Trailing scenes assigned to the val split");
    gen->add_option("--feature-dim", gen_cfg.feature_dim, "Feature length (at least 16)");
    gen->add_option("--min-shapes", gen_cfg.min_shapes, "Fewest shapes per scene");
    gen->add_option("--max-shapes", gen_cfg.max_shapes, "Most shapes per scene");
    gen->add_option("--nesting-rate", gen_cfg.nesting_rate, "Probability of a nested shape")
        ->check(CLI::Range(0.0, 1.0));
    gen->add_option("--captions", gen_cfg.captions_per_scene, "Captions per scene (1-3)");
    gen->callback([&] {
        action = [&] {
            if (gen_cfg.val_count > gen_scenes) throw ConfigError("--val exceeds --scenes");
            save_dataset(gen_out, generate_sceneworld(gen_seed, gen_scenes, gen_cfg));
        };
    });

    // build-tree
    std::string dataset_path, image_id, tree_format = "dot";
    double tree_eps = 0.1;
    auto* bt = app.add_subcommand("build-tree", "Print the region hierarchy of one image");
    bt->add_option("--dataset", dataset_path, "Dataset file")->required();
    bt->add_option("--image-id", image_id, "Image to parse")->required();
    bt->add_option("--epsilon", tree_eps, "IoU threshold")->check(CLI::Range(0.0, 0.999999));
    bt->add_option("--format", tree_format, "dot or json")->check(CLI::IsMember({"dot", "json"}));
    bt->callback([&] {
        action = [&] {
            const auto data = load_dataset(dataset_path);
            const SceneRecord* rec = find_record(data, image_id);
            if (!rec) throw InputError("image id '" + image_id + "' not found in " + dataset_path);
            const HierarchyTree tree = build_tree(rec->regions, tree_eps);
            out << (tree_format == "dot" ? tree_to_dot(tree, rec->regions) : tree_to_json(tree) + "\n");
        };
    });

    // train
    ModelFlags model_flags;
    TrainFlags train_flags;
    std::string checkpoint, log_path, scst_log_path;
    std::size_t scst_epochs = 0;
    double scst_lr = 5e-5;
    auto* tr = app.add_subcommand("train", "Cross-entropy training, optionally followed by SCST");
    tr->add_option("--dataset", dataset_path, "Dataset with train and val splits")->required();
    tr->add_option("--checkpoint", checkpoint, "Where to write the best-validation checkpoint")->required();
    tr->add_option("--log", log_path, "Epoch log CSV (default: stdout)");
    tr->add_option("--scst-epochs", scst_epochs, "Self-critical epochs after cross-entropy training");
    tr->add_option("--scst-lr", scst_lr, "Self-critical learning rate")->check(CLI::NonNegativeNumber);
    tr->add_option("--scst-log", scst_log_path, "Self-critical epoch log CSV (default: stdout)");
    add_model_flags(tr, model_flags);
    add_train_flags(tr, train_flags);
    tr->callback([&] {
        action = [&] {
            const auto data = load_dataset(dataset_path);
            if (data.empty()) throw InputError(dataset_path + " has no records");
            ModelConfig mc = model_flags.config();
            mc.feature_dim = data.front().feature_dim();
            CaptionModel model(mc, training_vocab(data, train_flags.min_count), train_flags.seed);
            TrainConfig tc = train_flags.config();
            tc.checkpoint_path = checkpoint;
            Sink log(log_path, out);
            train(model, data, tc, &log.stream());
            log.close(log_path);
            if (scst_epochs > 0) {
                CaptionModel best = CaptionModel::load(checkpoint);
                ScstConfig sc;
                sc.epochs = scst_epochs;
                sc.lr = scst_lr;
                sc.batch_size = train_flags.batch_size;
                sc.seed = train_flags.seed;
                Sink slog(scst_log_path, out);
                train_scst(best, data, sc, &slog.stream());
                slog.close(scst_log_path);
                best.save(checkpoint);
            }
        };
    });

    // caption
    std::size_t beam = 3;
    std::string split;
    bool json = false;
    auto* cap = app.add_subcommand("caption", "Caption every image of a dataset");
    cap->add_option("--dataset", dataset_path, "Dataset file")->required();
    cap->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
    cap->add_option("--beam", beam, "Beam size (1 is greedy)")->check(CLI::PositiveNumber);
    cap->add_option("--split", split, "Restrict to one split (default: all records)");
    cap->add_flag("--json", json, "Emit JSON Lines instead of tab-separated text");
    cap->callback([&] {
        action = [&] {
            const CaptionModel model = CaptionModel::load(checkpoint);
            const auto data = load_dataset(dataset_path);
            const auto scenes = pick_split(data, split);
            std::vector<std::string> lines(scenes.size());
            parallel_for(scenes.size(), thread_budget(), [&](std::size_t i) {
                const std::string sentence = join_tokens(model.caption_tokens(*scenes[i], beam));
                if (json) {
                    lines[i] = nlohmann::ordered_json{{"image_id", scenes[i]->image_id}, {"caption", sentence}}.dump();
                } else {
                    lines[i] = scenes[i]->image_id + "\t" + sentence;
                }
            });
            for (const auto& l : lines) out << l << '\n';
        };
    });

    // evaluate
    std::string candidates_path, recognizer_path;
    split = "";
    auto* ev = app.add_subcommand("evaluate", "Score captions against references");
    ev->add_option("--dataset", dataset_path, "Dataset with references")->required();
    auto* ev_ck = ev->add_option("--checkpoint", checkpoint, "Caption model to decode with");
    auto* ev_cand = ev->add_option("--candidates", candidates_path, "Captions as image_id<TAB>caption lines");
    ev_ck->excludes(ev_cand);
    ev->add_option("--recognizer", recognizer_path, "Recognizer checkpoint for label predictions");
    ev->add_option("--split", split, "Split to evaluate (default val; 'all' for every record)");
    ev->add_option("--beam", beam, "Beam size")->check(CLI::PositiveNumber);
    ev->add_flag("--json", json, "Emit a JSON report");
    ev->callback([&] {
        if (checkpoint.empty() && candidates_path.empty()) {
            throw CLI::ValidationError("evaluate", "one of --checkpoint or --candidates is required");
        }
        action = [&] {
            const auto data = load_dataset(dataset_path);
            const auto scenes = pick_split(data, split.empty() ? "val" : split);
            if (scenes.empty()) throw InputError("no records to evaluate in split '" + split + "'");
            std::vector<Sentence> cands(scenes.size());
            std::vector<std::vector<Sentence>> refs(scenes.size());
            std::vector<std::string> ids(scenes.size());
            std::vector<std::optional<std::vector<std::size_t>>> predicted(scenes.size());
            if (!checkpoint.empty()) {
                const CaptionModel model = CaptionModel::load(checkpoint);
                parallel_for(scenes.size(), thread_budget(),
                             [&](std::size_t i) { cands[i] = model.caption_tokens(*scenes[i], beam); });
            } else {
                const auto given = read_candidates(candidates_path);
                for (std::size_t i = 0; i < scenes.size(); ++i) {
                    const auto it = given.find(scenes[i]->image_id);
                    if (it == given.end()) {
                        throw InputError("no candidate caption for image " + scenes[i]->image_id);
                    }
                    cands[i] = tokenize(it->second.caption);
                    predicted[i] = it->second.labels;
                }
            }
            if (!recognizer_path.empty()) {
                const RecognitionModel rec = RecognitionModel::load(recognizer_path);
                for (std::size_t i = 0; i < scenes.size(); ++i) predicted[i] = rec.predict(*scenes[i]);
            }
            for (std::size_t i = 0; i < scenes.size(); ++i) {
                ids[i] = scenes[i]->image_id;
                if (scenes[i]->captions.empty()) throw InputError("image " + ids[i] + " has no reference captions");
                for (const auto& c : scenes[i]->captions) refs[i].push_back(tokenize(c));
            }
            const CaptionReport report = evaluate_captions(cands, refs, ids);

            std::optional<MultilabelScores> rec_scores;
            std::vector<std::vector<std::size_t>> pred_labels, true_labels;
            bool labels_present = false;
            for (std::size_t i = 0; i < scenes.size(); ++i) {
                if (!scenes[i]->labels) continue;
                labels_present = true;
                if (!predicted[i]) continue;
                pred_labels.push_back(*predicted[i]);
                true_labels.push_back(*scenes[i]->labels);
            }
            if (!pred_labels.empty()) {
                rec_scores = multilabel_scores(pred_labels, true_labels, label_classes(data));
            } else if (labels_present) {
                err << "note: labels present but no label predictions; pass --recognizer or a labels column\n";
            }
            if (json) {
                out << report_to_json(report, rec_scores ? &*rec_scores : nullptr) << '\n';
            } else {
                print_scores(out, report, rec_scores ? &*rec_scores : nullptr);
            }
        };
    });

    // sweep-epsilon
    std::vector<double> grid = kDefaultEpsilonGrid;
    std::string out_path;
    ModelFlags sweep_model;
    TrainFlags sweep_train;
    auto* sw = app.add_subcommand("sweep-epsilon", "Train and evaluate one model per IoU threshold");
    sw->add_option("--dataset", dataset_path, "Dataset with train and val splits")->required();
    sw->add_option("--grid", grid, "Comma-separated epsilon values")->delimiter(',');
    sw->add_option("--out", out_path, "CSV output (default: stdout)");
    add_model_flags(sw, sweep_model);
    add_train_flags(sw, sweep_train);
    sw->callback([&] {
        action = [&] {
            const auto data = load_dataset(dataset_path);
            if (data.empty()) throw InputError(dataset_path + " has no records");
            ModelConfig mc = sweep_model.config();
            mc.feature_dim = data.front().feature_dim();
            TrainConfig tc = sweep_train.config();
            tc.log_wall_time = false;
            const auto rows =
                sweep_epsilon(data, grid, mc, tc, sweep_train.seed, sweep_train.min_count, thread_budget());
            Sink sink(out_path, out);
            write_sweep_csv(sink.stream(), rows);
            sink.close(out_path);
        };
    });

    // ablation
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    ModelFlags abl_model;
    TrainFlags abl_train;
    auto* ab = app.add_subcommand("ablation", "Train every feature combination for several seeds");
    ab->add_option("--dataset", dataset_path, "Dataset with train and val splits")->required();
    ab->add_option("--seeds", seeds, "Comma-separated seeds")->delimiter(',');
    ab->add_option("--out", out_path, "CSV output (default: stdout)");
    add_model_flags(ab, abl_model);
    add_train_flags(ab, abl_train);
    ab->callback([&] {
        action = [&] {
            const auto data = load_dataset(dataset_path);
            if (data.empty()) throw InputError(dataset_path + " has no records");
            ModelConfig mc = abl_model.config();
            mc.feature_dim = data.front().feature_dim();
            TrainConfig tc = abl_train.config();
            tc.log_wall_time = false;
            const auto configs = ablation_configurations();
            const auto cells = run_ablation(data, configs, seeds, mc, tc, abl_train.min_count, thread_budget());
            Sink sink(out_path, out);
            write_ablation_csv(sink.stream(), cells);
            sink.close(out_path);
        };
    });

    // recognize
    RecognitionConfig rec_cfg;
    std::string rec_feature = "treelstm";
    auto* rc = app.add_subcommand("recognize", "Train the multi-label recognition head and report top-3 scores");
    rc->add_option("--dataset", dataset_path, "Labeled dataset with train and val splits")->required();
    rc->add_option("--feature", rec_feature, "treelstm or mean")->check(CLI::IsMember({"treelstm", "mean"}));
    rc->add_option("--classes", rec_cfg.classes, "Label classes (default: largest label + 1)");
    rc->add_option("--hidden", rec_cfg.hidden, "Tree-LSTM hidden size")->check(CLI::PositiveNumber);
    rc->add_option("--epsilon", rec_cfg.epsilon, "IoU threshold")->check(CLI::Range(0.0, 0.999999));
    rc->add_option("--epochs", rec_cfg.epochs, "Training epochs");
    rc->add_option("--lr", rec_cfg.lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
    rc->add_option("--batch-size", rec_cfg.batch_size, "Scenes per batch")->check(CLI::PositiveNumber);
    rc->add_option("--seed", rec_cfg.seed, "Seed");
    rc->add_option("--checkpoint", checkpoint, "Where to save the trained recognizer");
    rc->add_flag("--json", json, "Emit JSON");
    rc->callback([&] {
        action = [&] {
            const auto data = load_dataset(dataset_path);
            if (data.empty()) throw InputError(dataset_path + " has no records");
            rec_cfg.feature = rec_feature == "treelstm" ? RecognitionFeature::TreeLstm : RecognitionFeature::MeanPooled;
            if (rec_cfg.classes == 0) rec_cfg.classes = label_classes(data);
            RecognitionModel model(rec_cfg, data.front().feature_dim());
            const RecognitionResult r = train_recognition(model, data);
            if (!checkpoint.empty()) model.save(checkpoint);
            if (json) {
                out << recognition_json(r.val) << '\n';
            } else {
                out << "C-P " << format_score(r.val.class_precision) << "\nC-R " << format_score(r.val.class_recall)
                    << "\nC-F1 " << format_score(r.val.class_f1) << "\nO-P "
                    << format_score(r.val.overall_precision) << "\nO-R " << format_score(r.val.overall_recall)
                    << "\nO-F1 " << format_score(r.val.overall_f1) << '\n';
            }
        };
    });

    // gradcheck
    PipelineCheckOptions gc;
    auto* gcmd = app.add_subcommand("gradcheck", "Finite-difference check of the full pipeline on a tiny model");
    gcmd->add_flag("--break-gradient", gc.break_gradient, "Corrupt one backward rule (harness self-test)");
    gcmd->add_flag("--use-gcn", gc.use_gcn, "Include the relation pass");
    gcmd->add_option("--seed", gc.seed, "Seed for the tiny model and scene");
    gcmd->add_option("--fd-epsilon", gc.epsilon, "Finite-difference step")->check(CLI::Range(1e-12, 1e-2));
    gcmd->add_flag("--json", json, "Emit a JSON report");
    int gradcheck_status = kExitOk;
    gcmd->callback([&] {
        action = [&] {
            const PipelineCheckResult r = run_pipeline_check(gc);
            if (json) {
                out << pipeline_check_json(gc, r) << '\n';
            } else {
                char buf[256];
                std::snprintf(buf, sizeof buf, "%s: max relative error %.3e (tolerance %.0e) over %zu scalars\n",
                              r.passed ? "PASS" : "FAIL", r.report.max_rel_error, gc.tolerance, r.report.checked);
                out << buf;
                std::snprintf(buf, sizeof buf, "worst: %s[%zu] analytic %.9e numeric %.9e\n",
                              r.report.worst_param.c_str(), r.report.worst_index, r.report.worst_analytic,
                              r.report.worst_numeric);
                out << buf;
            }
            if (!r.passed) {
                err << "gradient check failed at " << r.report.worst_param << "[" << r.report.worst_index
                    << "], relative error " << r.report.max_rel_error << '\n';
                gradcheck_status = kExitFailure;
            }
        };
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    try {
        if (action) action();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return gradcheck_status;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

}  // namespace hipcap::cli
