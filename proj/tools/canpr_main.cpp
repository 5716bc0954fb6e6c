// Batch front end: canpr <subcommand> inputs... -o outdir [options]

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "canpr/imgcore.hpp"
#include "canpr/pipeline.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace canpr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitStage = 2;

struct Options {
  std::string command;
  std::vector<std::string> inputs;
  std::string out_dir = ".";
  std::string config_path;
  std::string dump_config;
  std::string region = "fg";
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool dump_intermediates = false;
  int threads = 1;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateInput:
    case ErrorKind::Numerical:
      return kExitStage;
    default:
      return kExitInput;
  }
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
  f << text;
}

std::string bbox_json(const BBox& b) {
  nlohmann::json j = {{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}};
  return j.dump() + "\n";
}

std::string energy_jsonl(const std::vector<double>& energies) {
  std::string s;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    nlohmann::json j = {{"iteration", i + 1}, {"energy", energies[i]}};
    s += j.dump() + "\n";
  }
  return s;
}

std::string timing_table(const fs::path& input, const StageLog& log) {
  std::ostringstream os;
  os << "timing " << input.string() << "\n";
  char line[128];
  double total = 0.0;
  for (const auto& t : log.entries()) {
    std::snprintf(line, sizeof line, "  %-24s %10.3f s\n", t.stage.c_str(), t.seconds);
    os << line;
    total += t.seconds;
  }
  std::snprintf(line, sizeof line, "  %-24s %10.3f s\n", "total", total);
  os << line;
  return os.str();
}

// Render subcommands segment the image themselves.
BinaryMask obtain_mask(const ImageF& img, const PipelineConfig& cfg, StageLog& log,
                       const fs::path& out, const std::string& stem, bool dump) {
  SegmentationResult seg = segment_salient(img, cfg, &log);
  if (dump) {
    save_pgm(seg.saliency.values(), out / (stem + ".saliency.pgm"));
    save_pgm(seg.mask, out / (stem + ".mask.pgm"));
    write_text(out / (stem + ".bbox.json"), bbox_json(seg.bbox));
    write_text(out / (stem + ".grabcut.jsonl"), energy_jsonl(seg.grabcut_energies));
  }
  return std::move(seg.mask);
}

void process(const Options& opt, const PipelineConfig& cfg, const fs::path& input, StageLog& log) {
  const ImageF img = load_png(input);
  const fs::path out(opt.out_dir);
  const std::string stem = input.stem().string();
  const bool dump = opt.dump_intermediates;
  const std::string& cmd = opt.command;

  if (cmd == "saliency") {
    const SaliencyMap map = log.time(stage::kSaliency, [&] { return saliency_map(img, cfg.saliency); });
    const OtsuResult otsu = log.time(stage::kOtsu, [&] { return otsu_threshold(map); });
    save_pgm(map.values(), out / (stem + ".saliency.pgm"));
    save_pgm(otsu.mask, out / (stem + ".otsu.pgm"));
  } else if (cmd == "segment") {
    SegmentationResult seg = segment_salient(img, cfg, &log);
    save_pgm(seg.mask, out / (stem + ".mask.pgm"));
    write_text(out / (stem + ".bbox.json"), bbox_json(seg.bbox));
    if (dump) {
      save_pgm(seg.saliency.values(), out / (stem + ".saliency.pgm"));
      save_pgm(seg.otsu_mask, out / (stem + ".otsu.pgm"));
      write_text(out / (stem + ".grabcut.jsonl"), energy_jsonl(seg.grabcut_energies));
    }
  } else if (cmd == "exaggerate") {
    const BinaryMask mask = obtain_mask(img, cfg, log, out, stem, dump);
    save_png(render_exaggerated(img, mask, cfg, &log).image, out / (stem + ".exaggerated.png"));
  } else if (cmd == "defocus-exaggerate") {
    const BinaryMask mask = obtain_mask(img, cfg, log, out, stem, dump);
    save_png(render_exaggerated_defocus(img, mask, cfg, &log).image, out / (stem + ".defocus.png"));
  } else if (cmd == "abstract") {
    const BinaryMask mask = obtain_mask(img, cfg, log, out, stem, dump);
    const bool fg = opt.region == "fg";
    const auto res = render_abstracted(img, mask, cfg, fg ? AbstractRegion::Foreground : AbstractRegion::Background, &log);
    save_png(res.image, out / (stem + (fg ? ".abstract-fg.png" : ".abstract-bg.png")));
  } else if (cmd == "run-all") {
    RenderOutputs r = run_all(img, cfg, &log);
    save_png(*r.exaggerated, out / (stem + ".exaggerated.png"));
    save_png(*r.exaggerated_defocus, out / (stem + ".defocus.png"));
    save_png(*r.fg_abstracted, out / (stem + ".abstract-fg.png"));
    save_png(*r.bg_abstracted, out / (stem + ".abstract-bg.png"));
    if (dump) {
      save_pgm(r.saliency_map->values(), out / (stem + ".saliency.pgm"));
      save_pgm(*r.mask, out / (stem + ".mask.pgm"));
      write_text(out / (stem + ".bbox.json"), bbox_json(*r.bbox));
      write_text(out / (stem + ".grabcut.jsonl"), energy_jsonl(r.grabcut_energies));
    }
  }
}

struct Outcome {
  int code = kExitOk;
  std::string report;  // timing table, or the error line
};

Outcome run_one(const Options& opt, const PipelineConfig& cfg, const fs::path& input) {
  StageLog log;
  try {
    process(opt, cfg, input, log);
    return {kExitOk, timing_table(input, log)};
  } catch (const Error& e) {
    return {exit_code_for(e.kind()), "error: " + input.string() + ": " + e.what() + "\n"};
  } catch (const std::exception& e) {
    return {kExitInput, "error: " + input.string() + ": " + e.what() + "\n"};
  }
}

int run(const Options& opt) {
  PipelineConfig cfg = opt.config_path.empty() ? PipelineConfig{} : load_config(opt.config_path);
  if (opt.seed_given) cfg.grabcut.seed = opt.seed;
  cfg.validate();

  if (!opt.dump_config.empty()) save_config(cfg, opt.dump_config);
  if (opt.command.empty()) return kExitOk;

  const auto inputs = expand_inputs(opt.inputs);
  if (inputs.empty()) throw Error(ErrorKind::InvalidInput, "no input images");
  fs::create_directories(opt.out_dir);

  std::vector<Outcome> outcomes(inputs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < inputs.size();) outcomes[i] = run_one(opt, cfg, inputs[i]);
  };
  const int n = std::max(1, std::min<int>(opt.threads, static_cast<int>(inputs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kExitOk;
  for (const auto& o : outcomes) {
    (o.code == kExitOk ? std::cout : std::cerr) << o.report;
    code = std::max(code, o.code);
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Content-aware non-photorealistic rendering"};
  app.set_help_all_flag("--help-all");
  app.add_option("--dump-config", opt.dump_config, "Write the effective configuration as JSON");
  app.require_subcommand(0, 1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("inputs", opt.inputs, "PNG files or directories")->required();
    sub->add_option("-o,--output", opt.out_dir, "Output directory (created if absent)");
    sub->add_option("--config", opt.config_path, "JSON configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "GrabCut initialization seed")
        ->each([&](const std::string&) { opt.seed_given = true; });
    sub->add_flag("--dump-intermediates", opt.dump_intermediates, "Also write saliency, mask and bbox files");
    sub->add_option("--threads", opt.threads, "Images processed concurrently")->check(CLI::PositiveNumber);
    sub->add_option("--dump-config", opt.dump_config, "Write the effective configuration as JSON");
  };
  for (const char* name : {"saliency", "segment", "exaggerate", "defocus-exaggerate", "run-all"}) {
    add_common(app.add_subcommand(name));
  }
  CLI::App* abstract = app.add_subcommand("abstract");
  add_common(abstract);
  abstract->add_option("--region", opt.region, "Abstract the salient foreground or the background")
      ->check(CLI::IsMember({"fg", "bg"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }
  if (!app.get_subcommands().empty()) opt.command = app.get_subcommands().front()->get_name();
  if (opt.command.empty() && opt.dump_config.empty()) {
    std::cerr << app.help();
    return kExitInput;
  }

  try {
    return run(opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
