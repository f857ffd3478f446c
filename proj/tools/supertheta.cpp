#include <fstream>
#include <iostream>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "supertheta/pipeline.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitPipeline = 3;

void write_output(const nlohmann::json& doc, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << doc.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"supertheta: algebraic theta nullvalues of E^g / H over finite fields"};
    app.require_subcommand(1);

    std::string config_path, out_path, mode;
    int threads = 0;
    bool dump = false, serial = false, no_timings = false;

    auto* run = app.add_subcommand("run", "run the pipeline on a JSON problem description");
    run->add_option("config", config_path, "problem description")->required()->check(CLI::ExistingFile);
    run->add_option("--mode", mode, "full (level-4 theta constants) or squares (level-2 route)")
        ->check(CLI::IsMember({"full", "squares"}));
    run->add_option("--out", out_path, "output JSON path (default: stdout)");
    run->add_option("--threads", threads, "OpenMP threads for the per-characteristic loop")->check(CLI::NonNegativeNumber);
    run->add_flag("--dump-intermediates", dump, "include intermediate data in the output");
    run->add_flag("--serial", serial, "use the serial reference loop");
    run->add_flag("--no-timings", no_timings, "omit wall-clock timings (byte-stable output)");

    CLI11_PARSE(app, argc, argv);

    st::ProblemConfig cfg;
    try {
        cfg = st::load_config(config_path);
    } catch (const st::ValidationError& e) {
        std::cerr << "validation failed: " << e.what() << "\n";
        return kExitValidation;
    }
    if (threads == 0) threads = cfg.threads;
    if (threads > 0) omp_set_num_threads(threads);

    st::RunOptions opt;
    if (!mode.empty()) opt.mode = st::parse_mode(mode);
    opt.parallel = !serial;
    opt.dump_intermediates = dump;
    try {
        st::RunResult r = st::run_pipeline(cfg, opt);
        write_output(st::result_to_json(cfg, r, !no_timings), out_path);
    } catch (const st::ValidationError& e) {
        std::cerr << "validation failed: " << e.what() << "\n";
        return kExitValidation;
    } catch (const st::PipelineError& e) {
        std::cerr << "pipeline failed: " << e.what() << "\n";
        if (dump && !e.partial().is_null()) std::cerr << "partial results:\n" << e.partial().dump(2) << "\n";
        return kExitPipeline;
    } catch (const std::exception& e) {
        std::cerr << "pipeline failed: " << e.what() << "\n";
        return kExitPipeline;
    }
    return 0;
}
