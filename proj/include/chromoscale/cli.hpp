#ifndef CHROMOSCALE_CLI_HPP
#define CHROMOSCALE_CLI_HPP

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "chromoscale/config.hpp"
#include "chromoscale/core_model.hpp"
#include "chromoscale/gss_io.hpp"
#include "chromoscale/headless_render.hpp"
#include "chromoscale/render_list.hpp"
#include "chromoscale/scope_focus.hpp"
#include "chromoscale/server.hpp"
#include "chromoscale/synthgen.hpp"

namespace chromoscale::cli {

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kUsageError = 2, kRuntimeError = 3 };

inline constexpr const char* kConfigEnv = "CHROMOSCALE_CONFIG";

/// Bad flag value discovered after parsing (e.g. an index outside the loaded dataset).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Accepts either a dataset directory or the manifest file itself.
inline std::filesystem::path manifest_path(const std::filesystem::path& p) {
    return std::filesystem::is_directory(p) ? p / "manifest.json" : p;
}

inline TemplateSet load_templates(const std::string& atom_template) {
    if (atom_template.empty()) return default_templates();
    std::ifstream in(atom_template);
    if (!in) throw UsageError("cannot open atom template " + atom_template);
    const bool pdb = std::filesystem::path(atom_template).extension() == ".pdb";
    auto nt = default_nucleotide_template();
    return TemplateSet(nt, pdb ? read_pdb_cluster(in) : read_atom_template(in));
}

inline EngineConfig resolve_config(const std::string& flag) {
    std::string path = flag;
    if (path.empty()) {
        if (const char* env = std::getenv(kConfigEnv)) path = env;
    }
    if (path.empty()) return EngineConfig{};
    try {
        return load_config(path);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

inline FocusState resolve_focus(const GenomeDataset& ds, std::optional<std::size_t> chromosome,
                                std::optional<std::size_t> fiber) {
    if (fiber) {
        if (*fiber >= ds.count(DataLevel::Fiber)) throw UsageError("--focus-fiber out of range");
        const FocusState f = set_focus_fiber(ds, *fiber);
        if (chromosome && *chromosome != f.chromosome) {
            throw UsageError("--focus-fiber does not belong to --focus-chromosome");
        }
        return f;
    }
    const std::size_t c = chromosome.value_or(0);
    if (c >= ds.count(DataLevel::Chromosome)) throw UsageError("--focus-chromosome out of range");
    return set_focus_chromosome(ds, c);
}

/// Renders one frame of `ds` at scale s, camera framing the focus point.
inline Image snapshot(const GenomeDataset& ds, const EngineConfig& cfg, double s, double offset,
                      const FocusState& focus, int width, int height) {
    const RenderList list = assemble(ds, ScaleParam{s, offset}, focus, cfg);
    return render(list, camera_at_scale(focus.focus_point, s, cfg.camera, cfg.fov_deg, width, height));
}

inline void print_report(const GenomeDataset& ds, const ValidationReport& report, std::ostream& out) {
    for (auto level : {DataLevel::Chromosome, DataLevel::Locus, DataLevel::Fiber, DataLevel::Nucleosome,
                       DataLevel::Nucleotide, DataLevel::Atom}) {
        out << to_string(level) << ' ' << ds.count(level) << '\n';
    }
    out << (report.ok() ? "valid" : "invalid") << '\n';
}

struct Options {
    std::string config;

    GenParams gen;
    std::string atom_template;
    std::string out;

    std::string manifest;

    std::string data;
    double scale = 0.0;
    double offset = 0.0;
    std::optional<std::size_t> focus_chromosome;
    std::optional<std::size_t> focus_fiber;
    int width = 128;
    int height = 96;

    std::size_t steps = 29;
    std::size_t repeat = 1;

    unsigned short port = kDefaultPort;
    std::string address = "127.0.0.1";
    unsigned threads = 0;
};

inline void add_generation_flags(CLI::App* app, Options& o) {
    app->add_option("--chromosomes", o.gen.chromosomes, "Number of chromosomes")->check(CLI::PositiveNumber);
    app->add_option("--loci", o.gen.loci_per_chromosome, "Loci per chromosome")->check(CLI::PositiveNumber);
    app->add_option("--fibers", o.gen.fibers_per_locus, "Fibers per locus")->check(CLI::PositiveNumber);
    app->add_option("--nucleosomes", o.gen.nucleosomes_per_fiber, "Nucleosomes per fiber")
        ->check(CLI::PositiveNumber);
    app->add_option("--seed", o.gen.seed, "Random seed");
    app->add_option("--nucleus-radius", o.gen.nucleus_radius, "Nucleus radius in nm")->check(CLI::PositiveNumber);
    app->add_option("--max-points", o.gen.max_points, "Refuse to generate more stored points than this")
        ->check(CLI::PositiveNumber);
    app->add_option("--atom-template", o.atom_template,
                    "Atom template file (nt_index dx dy dz element per line, or .pdb cluster)")
        ->check(CLI::ExistingFile);
}

inline std::unique_ptr<CLI::App> make_app(Options& o) {
    auto app = std::make_unique<CLI::App>("chromoscale: multi-scale 3D genome visualization engine", "chromoscale");
    app->require_subcommand(1, 1);
    app->add_option("--config", o.config,
                    std::string("Engine config JSON (overrides the ") + kConfigEnv + " environment variable)");

    auto* gen = app->add_subcommand("generate", "Synthesize a hierarchical dataset and write it as GSS-lite");
    add_generation_flags(gen, o);
    gen->add_option("--out", o.out, "Output directory")->required();

    auto* val = app->add_subcommand("validate", "Load a dataset and check its structural invariants");
    val->add_option("manifest", o.manifest, "Manifest file or dataset directory")->required();

    auto* snap = app->add_subcommand("snapshot", "Render one frame headlessly to a PPM image");
    snap->add_option("--data", o.data, "Manifest file or dataset directory")->required();
    snap->add_option("--scale", o.scale, "Global scale parameter s in [0, 7]")->required()->check(CLI::Range(0.0, 7.0));
    snap->add_option("--offset", o.offset, "Scale offset in [-0.9, 0.9]")->check(CLI::Range(-0.9, 0.9));
    snap->add_option("--focus-chromosome", o.focus_chromosome, "Focus chromosome index (default 0)");
    snap->add_option("--focus-fiber", o.focus_fiber, "Focus fiber index (overrides the chromosome's median fiber)");
    snap->add_option("--width", o.width, "Image width in pixels")->check(CLI::Range(1, 16384));
    snap->add_option("--height", o.height, "Image height in pixels")->check(CLI::Range(1, 16384));
    snap->add_option("--out", o.out, "Output PPM path")->required();

    auto* bench = app->add_subcommand("bench", "Time RenderList assembly over a sweep of s and print CSV");
    bench->add_option("--data", o.data, "Manifest file or dataset directory (default: generate from flags)");
    add_generation_flags(bench, o);
    bench->add_option("--steps", o.steps, "Number of evenly spaced s samples over [0, 7]")->check(CLI::Range(2, 100000));
    bench->add_option("--repeat", o.repeat, "Assemblies per sample; the fastest is reported")
        ->check(CLI::Range(1, 1000));
    bench->add_option("--focus-chromosome", o.focus_chromosome, "Focus chromosome index (default 0)");
    bench->add_option("--focus-fiber", o.focus_fiber, "Focus fiber index");

    auto* serve = app->add_subcommand("serve", "Serve interactive sessions over WebSocket");
    serve->add_option("--data", o.data, "Manifest file or dataset directory")->required();
    serve->add_option("--port", o.port, "TCP port (0 picks a free port)");
    serve->add_option("--address", o.address, "Listen address");
    serve->add_option("--threads", o.threads, "Worker threads (0 = automatic)");
    return app;
}

inline int cmd_generate(const Options& o, std::ostream& out) {
    const GenomeDataset ds = generate(o.gen, load_templates(o.atom_template));
    const std::string provenance = "synthgen seed=" + std::to_string(o.gen.seed) + " counts=" +
                                   std::to_string(o.gen.chromosomes) + "x" + std::to_string(o.gen.loci_per_chromosome) +
                                   "x" + std::to_string(o.gen.fibers_per_locus) + "x" +
                                   std::to_string(o.gen.nucleosomes_per_fiber);
    write_dataset(ds, o.out, provenance);
    out << "wrote " << (std::filesystem::path(o.out) / "manifest.json").string() << '\n';
    print_report(ds, validate(ds), out);
    return kOk;
}

inline int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto path = manifest_path(o.manifest);
    if (!std::filesystem::exists(path)) throw GssIoError("no such manifest: " + path.string());
    try {
        const GenomeDataset ds = load_dataset(path);
        const auto report = validate(ds);
        print_report(ds, report, out);
        return report.ok() ? kOk : kValidationFailure;
    } catch (const GssParseError& e) {
        err << "invalid: " << e.what() << '\n';
        out << "invalid\n";
        return kValidationFailure;
    } catch (const DatasetError& e) {
        err << "invalid: " << e.what() << '\n';
        out << "invalid\n";
        return kValidationFailure;
    }
}

inline int cmd_snapshot(const Options& o, const EngineConfig& cfg, std::ostream& out) {
    const GenomeDataset ds = load_dataset(manifest_path(o.data));
    const FocusState focus = resolve_focus(ds, o.focus_chromosome, o.focus_fiber);
    write_image(snapshot(ds, cfg, o.scale, o.offset, focus, o.width, o.height), o.out);
    out << "wrote " << o.out << '\n';
    return kOk;
}

inline int cmd_bench(const Options& o, const EngineConfig& cfg, std::ostream& out) {
    const GenomeDataset ds = o.data.empty() ? generate(o.gen, load_templates(o.atom_template))
                                            : load_dataset(manifest_path(o.data));
    const FocusState focus = resolve_focus(ds, o.focus_chromosome, o.focus_fiber);
    out << "s,row,instances_total,instances_overlay,assemble_ms\n";
    for (std::size_t i = 0; i < o.steps; ++i) {
        const double s = kMaxScale * static_cast<double>(i) / static_cast<double>(o.steps - 1);
        double best = std::numeric_limits<double>::infinity();
        RenderList list;
        for (std::size_t r = 0; r < o.repeat; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            list = assemble(ds, ScaleParam{s, 0.0}, focus, cfg);
            const auto t1 = std::chrono::steady_clock::now();
            best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        out << std::fixed << std::setprecision(4) << s << ',' << list.weights.row << ',' << list.stats.total << ','
            << list.stats.overlay << ',' << std::setprecision(3) << best << '\n';
    }
    return kOk;
}

inline int cmd_serve(const Options& o, const EngineConfig& cfg, std::ostream& out) {
    auto ds = std::make_shared<const GenomeDataset>(load_dataset(manifest_path(o.data)));
    Server server(ds, cfg, o.port, o.address);
    out << "listening on ws://" << o.address << ':' << server.port() << std::endl;
    server.run(o.threads, true);
    out << "stopped\n";
    return kOk;
}

/// Entry point shared by the executable and tests. Never throws.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    auto app = make_app(o);
    std::vector<const char*> argv{"chromoscale"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app->parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << (app->get_subcommands().empty() ? app->help() : app->get_subcommands().front()->help());
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app->help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    const std::string sub = app->get_subcommands().front()->get_name();
    try {
        const EngineConfig cfg = resolve_config(o.config);
        if (sub == "generate") return cmd_generate(o, out);
        if (sub == "validate") return cmd_validate(o, out, err);
        if (sub == "snapshot") return cmd_snapshot(o, cfg, out);
        if (sub == "bench") return cmd_bench(o, cfg, out);
        if (sub == "serve") return cmd_serve(o, cfg, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kUsageError;
}

}  // namespace chromoscale::cli

#endif  // CHROMOSCALE_CLI_HPP
