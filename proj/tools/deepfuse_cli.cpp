// Command-line front end for the deepfuse pipeline.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "deepfuse/error.hpp"
#include "deepfuse/harness.hpp"
#include "deepfuse/imgprep.hpp"
#include "deepfuse/synthetic.hpp"

namespace {

using namespace deepfuse;

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

ExperimentConfig resolve_config(const Globals& g) {
    if (g.config.empty()) throw ConfigError("--config is required for this command");
    ExperimentConfig cfg = load_config(g.config);
    if (g.seed) cfg.seed = *g.seed;
    if (!g.out.empty()) cfg.output_dir = g.out;
    return cfg;
}

void print_table(const EvaluationTable& t) { write_evaluation_csv(std::cout, t); }

void print_selection(const Selection& s) {
    for (const auto& step : s.trace) {
        std::printf("%-32s mean=%.6f std=%.6f family=%s %s\n", step.extractor.c_str(), step.mean, step.std,
                    step.family.c_str(),
                    step.selected ? "selected" : ("skipped (family of " + step.skipped_for + ")").c_str());
    }
    std::string ids;
    for (std::size_t i = 0; i < s.ids.size(); ++i) ids += (i ? ", " : "") + s.ids[i];
    std::printf("selected: %s\n", ids.c_str());
}

int exit_code(const Error& e) {
    switch (e.category()) {
        case ErrorCategory::Config: return 2;
        case ErrorCategory::Data: return 3;
        case ErrorCategory::Runtime: return 1;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep-feature selection, fusion and classifier-ensemble pipeline"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Experiment config file (key = value lines)");
    app.add_option("--seed", g.seed, "Override the config seed");
    app.add_option("--out", g.out, "Override the output directory");

    auto* evaluate = app.add_subcommand("evaluate", "Cross-validated extractors x families table");
    auto* select = app.add_subcommand("select", "Top-k extractor selection");
    std::string select_table;
    select->add_option("--table", select_table, "Evaluation CSV to select from instead of recomputing");
    auto* fuse = app.add_subcommand("fuse", "Feature-fusion experiments on the selected extractors");
    auto* tune = app.add_subcommand("tune", "Grid search and refit one family on one feature set");
    std::string tune_set;
    std::string tune_family;
    tune->add_option("--set", tune_set, "Extractor id, or ids joined with '+'")->required();
    tune->add_option("--family", tune_family, "Classifier family")->required();
    auto* vote = app.add_subcommand("vote", "Classifier-ensemble (majority vote) experiments");
    auto* run = app.add_subcommand("run", "Full pipeline");
    auto* replay = app.add_subcommand("replay-selection", "Selection with rank trace from an evaluation CSV");
    std::string replay_table;
    std::size_t replay_k = 3;
    replay->add_option("--table", replay_table, "Evaluation CSV")->required();
    replay->add_option("--k", replay_k, "Number of extractors to select");

    auto* prep = app.add_subcommand("prep", "Crop to the brain region and resize a PGM image");
    std::string prep_in;
    std::string prep_out;
    imgprep::CropParams crop;
    prep->add_option("--in", prep_in, "Input PGM")->required();
    prep->add_option("--out", prep_out, "Output PGM")->required();
    prep->add_option("--threshold", crop.threshold, "Foreground threshold");
    prep->add_option("--height", crop.target_size.height, "Output height");
    prep->add_option("--width", crop.target_size.width, "Output width");

    auto* synth = app.add_subcommand("synth", "Write the synthetic three-extractor fixture");
    std::string synth_dir;
    std::size_t synth_rows = 600;
    std::uint64_t synth_seed = 0;
    synth->add_option("--dir", synth_dir, "Output directory")->required();
    synth->add_option("--rows", synth_rows, "Samples per extractor");
    synth->add_option("--fixture-seed", synth_seed, "Seed for the generated data");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*replay) {
            print_selection(replay_selection(replay_table, replay_k));
        } else if (*prep) {
            bool cropped = false;
            imgprep::write_pgm(prep_out, imgprep::prepare(imgprep::read_pgm(prep_in), crop, &cropped));
            if (!cropped) std::fprintf(stderr, "no foreground found; resized the whole image\n");
        } else if (*synth) {
            write_synthetic_fixture(synth_dir,
                                    make_synthetic_sets(default_synthetic_extractors(), synth_rows, synth_seed));
        } else if (*select && !select_table.empty()) {
            const ExperimentConfig cfg = resolve_config(g);
            print_selection(replay_selection(select_table, cfg.k_top));
        } else if (*run) {
            const RunReport r = run_pipeline(resolve_config(g));
            std::printf("done in %.3f s\n", r.seconds);
        } else {
            Pipeline p(resolve_config(g));
            if (*evaluate) {
                print_table(p.evaluate());
            } else if (*select) {
                print_selection(p.select());
            } else if (*fuse) {
                print_table(p.fuse());
            } else if (*tune) {
                const TunedResult& t = p.tune(tune_set, parse_family(tune_family));
                std::printf("params: %s\ncv: %.6f +- %.6f\ntest accuracy: %.6f\n",
                            format_params(t.best.hyperparams).c_str(), t.cv_mean, t.cv_std, t.test_accuracy);
            } else if (*vote) {
                print_table(p.ensemble());
            }
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
