// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>

#include "canpr/error.hpp"
#include "canpr/filters.hpp"
#include "canpr/imgcore.hpp"
#include "canpr/pipeline.hpp"
#include "canpr/saliency.hpp"
#include "canpr/segmentation/grabcut.hpp"
#include "canpr/segmentation/maxflow.hpp"
#include "json.hpp"
#include "oracles/oracles.hpp"

using namespace canpr;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CANPR_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "canpr_acceptance" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

double max_abs_diff(const ImageF& a, const ImageF& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// Photograph-sized stand-in: textured backdrop with a warm elliptical subject.
ImageF synthetic_photo(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ImageF img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double ex = (x - 0.52 * w) / (0.19 * w), ey = (y - 0.49 * h) / (0.21 * h);
      const bool in = ex * ex + ey * ey < 1.0;
      const double n = 0.06 * (oracle::unit(rng) - 0.5);
      const double tex = 0.1 * std::sin(x / 13.0) + 0.1 * std::cos(y / 9.0);
      const double rgb[3] = {in ? 0.93 + n : 0.2 + tex + n, in ? 0.55 + n + 0.3 * tex : 0.35 + tex + n,
                             in ? 0.1 + n : 0.7 + n};
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = std::clamp(rgb[c], 0.0, 1.0);
    }
  return img;
}

Verdict otsu_oracle() {
  std::mt19937_64 rng(101);
  const auto t0 = std::chrono::steady_clock::now();
  int matches = 0, total = 0;
  while (total < 100) {
    Histogram256 h{};
    const double density = oracle::unit(rng);
    for (auto& bin : h)
      if (oracle::unit(rng) < density) bin = rng() % 10000;
    if (std::count_if(h.begin(), h.end(), [](auto c) { return c > 0; }) < 2) continue;
    ++total;
    matches += otsu_threshold(h) == oracle::otsu(h);
  }
  const double dt = seconds_since(t0);
  return {matches == 100 && dt < 1.0,
          std::to_string(matches) + "/100 thresholds equal the exhaustive argmax, " + fmt("%.3f s", dt)};
}

Verdict maxflow_oracle() {
  std::mt19937_64 rng(202);
  const auto t0 = std::chrono::steady_clock::now();
  int matches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    FlowNetwork net(n);
    std::vector<oracle::Arc> arcs;
    const int edges = static_cast<int>(rng() % (4 * (n + 2)));
    for (int e = 0; e < edges; ++e) {
      const int u = static_cast<int>(rng() % (n + 2)), v = static_cast<int>(rng() % (n + 2));
      if (u == v || u == n + 1 || v == n) continue;
      const long cap = static_cast<long>(rng() % 21);
      net.add_edge(u, v, static_cast<double>(cap));
      arcs.push_back({u, v, cap});
    }
    matches += max_flow(net).flow == static_cast<double>(oracle::min_cut(n, arcs));
  }
  const double dt = seconds_since(t0);
  return {matches == 200 && dt < 10.0,
          std::to_string(matches) + "/200 flows equal the enumerated min cut, " + fmt("%.3f s", dt)};
}

Verdict filter_oracles() {
  std::mt19937_64 rng(303);
  double guided = 0, bilateral = 0;
  for (int i = 0; i < 20; ++i) {
    const ImageF p = oracle::random_image(16, 16, 1, rng), I = oracle::random_image(16, 16, 1, rng);
    guided = std::max(guided, max_abs_diff(guided_filter(p, I, 2, 0.01), oracle::guided_filter(p, I, 2, 0.01)));
    const LabImage lab(oracle::random_image(16, 16, 3, rng));
    bilateral = std::max(bilateral, max_abs_diff(bilateral_filter(lab, 3.0, 0.1).planes(),
                                                 oracle::bilateral(lab.planes(), 3.0, 0.1)));
  }
  return {guided <= 1e-6 && bilateral <= 1e-6,
          "max abs error guided " + fmt("%.2e", guided) + ", bilateral " + fmt("%.2e", bilateral)};
}

Verdict grabcut_monotone() {
  std::mt19937_64 rng(404);
  int monotone = 0;
  std::string note;
  for (int i = 0; i < 10; ++i) {
    const ImageF img = oracle::random_scene(rng, 32);
    GrabCutOptions opts;
    opts.seed = static_cast<std::uint64_t>(i);
    opts.rel_tol = 0.0;
    try {
      const auto e = grabcut(img, BBox{4, 4, 28, 28}, opts).energies;
      bool ok = true;
      for (std::size_t k = 1; k < e.size(); ++k) ok &= e[k] <= e[k - 1] + 1e-9 * std::abs(e[k - 1]);
      monotone += ok;
    } catch (const Error& err) {
      note = std::string(" (") + err.what() + ")";
    }
  }
  const GrabCutResult sq = grabcut(oracle::orange_square(32, 10, 12), BBox{5, 5, 27, 27});
  bool exact = true;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) exact &= sq.mask.at(x, y) == (x >= 10 && x < 22 && y >= 10 && y < 22);
  return {monotone == 10 && exact, std::to_string(monotone) + "/10 energy sequences non-increasing, square mask " +
                                       (exact ? "exact" : "wrong") + note};
}

Verdict paper_parameters() {
  const PipelineConfig cfg;
  const GaussianKernel k = GaussianKernel::make(cfg.defocus.radius, cfg.defocus.sigma);
  const fs::path dir = scratch("params");
  const fs::path dump = dir / "config.json";
  if (run_cli("--dump-config " + dump.string()) != 0) return {false, "config dump failed"};
  const auto j = nlohmann::json::parse(slurp(dump));
  const bool dumped = j["defocus"]["kernel_size"] == 9 && j["defocus"]["sigma"] == 4.0 &&
                      j["abstraction"]["spatial_sigma"] == 3.0 && j["abstraction"]["range_sigma"] == 0.1 &&
                      j["abstraction"]["quant_levels"] == 10;
  const bool defaults = k.weights.size() == 81 && k.sigma == 4.0 && cfg.abstraction.spatial_sigma == 3.0 &&
                        cfg.abstraction.range_sigma == 0.1 && cfg.abstraction.quant_levels == 10;
  return {dumped && defaults, "defocus 9x9 sigma 4, abstraction sigma_s 3 sigma_r 0.1, 10 levels; dump " +
                                  std::string(dumped ? "shows them" : "disagrees")};
}

Verdict quantization_bound() {
  std::mt19937_64 rng(606);
  std::size_t worst = 0;
  bool idempotent = true;
  const AbstractionParams p;
  std::vector<ImageF> inputs;
  for (int i = 0; i < 8; ++i) inputs.push_back(oracle::random_image(40, 32, 3, rng));
  ImageF ramp(256, 8, 3);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 256; ++x)
      for (int c = 0; c < 3; ++c) ramp.at(x, y, c) = x / 255.0;
  inputs.push_back(ramp);
  inputs.push_back(synthetic_photo(120, 80, 7));
  for (const ImageF& img : inputs) {
    const AbstractionLayers layers = abstract_layers(img, p);
    worst = std::max(worst, std::set<double>(layers.quantized.L().begin(), layers.quantized.L().end()).size());
    idempotent &= quantize_luminance(layers.quantized, p.quant_levels).planes() == layers.quantized.planes();
  }
  return {worst <= 10 && idempotent, "at most " + std::to_string(worst) + " distinct quantized L values, " +
                                         (idempotent ? "idempotent" : "not idempotent")};
}

Verdict compositing() {
  const int W = 64;
  ImageF src(W, 1, 3, 0.3), dst(W, 1, 3, 0.7);
  for (int c = 0; c < 3; ++c) {
    dst.at(0, 0, c) = 0.0;
    dst.at(W - 1, 0, c) = 1.0;
  }
  BinaryMask row(W, 1);
  for (int x = 1; x < W - 1; ++x) row.set(x, 0, true);
  CompositeRequest req;
  req.source = &src;
  req.dest = &dst;
  req.mask = &row;
  req.feather_width = 0;
  const ImageF harmonic = composite(req).image;
  double err = 0;
  for (int c = 0; c < 3; ++c)
    for (int x = 0; x < W; ++x) err = std::max(err, std::abs(harmonic.at(x, 0, c) - x / double(W - 1)));

  std::mt19937_64 rng(707);
  const ImageF a = oracle::random_image(64, 48, 3, rng), b = oracle::random_image(64, 48, 3, rng);
  BinaryMask blob(64, 48);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) blob.set(x, y, std::hypot(x - 30, y - 22) < 10);
  bool far_exact = true;
  for (CompositeMode mode : {CompositeMode::Feather, CompositeMode::GradientBlend}) {
    CompositeRequest r2;
    r2.source = &a;
    r2.dest = &b;
    r2.mask = &blob;
    r2.mode = mode;
    const ImageF out = composite(r2).image;
    const BinaryMask far = dilate(blob, r2.feather_width).inverted();
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 64; ++x) far_exact &= !far.at(x, y) || out.at(x, y, c) == b.at(x, y, c);
  }

  double worst_residual = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const RenderOutputs out = run_all(oracle::disk_scene(128, 112, 50 + 10 * seed, 56, 22, seed), PipelineConfig{});
    for (const auto& [flow, res] : out.residuals)
      for (double r : res) worst_residual = std::max(worst_residual, r);
  }
  return {err <= 1e-4 && far_exact && worst_residual <= 1e-5,
          "harmonic row error " + fmt("%.2e", err) + ", far field " + (far_exact ? "exact" : "differs") +
              ", worst pipeline residual " + fmt("%.2e", worst_residual)};
}

Verdict content_awareness() {
  const ImageF img = oracle::disk_scene(128, 128, 60, 66, 24, 808);
  const PipelineConfig cfg;
  const RenderOutputs out = run_all(img, cfg);
  const BinaryMask& mask = *out.mask;
  const ImageF blurred = gaussian_blur(img, cfg.defocus.radius, cfg.defocus.sigma);
  const int w = cfg.compositing.feather_width;
  struct Flow {
    const char* name;
    const ImageF* result;
    const ImageF* dest;
    BinaryMask effective;
  };
  const Flow flows[] = {{"exaggerated", &*out.exaggerated, &img, mask},
                        {"defocus", &*out.exaggerated_defocus, &blurred, mask},
                        {"abstract-fg", &*out.fg_abstracted, &img, mask},
                        {"abstract-bg", &*out.bg_abstracted, &img, mask.inverted()}};
  std::string failed;
  std::size_t checked = 0;
  for (const Flow& f : flows) {
    const BinaryMask far = dilate(f.effective, w).inverted();
    bool ok = true;
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x) {
          if (!far.at(x, y)) continue;
          ok &= f.result->at(x, y, c) == f.dest->at(x, y, c);
          ++checked;
        }
    if (!ok) failed += std::string(" ") + f.name;
  }
  return {failed.empty() && checked > 0,
          failed.empty() ? std::to_string(checked) + " far-field samples bit-equal their destination"
                         : "differs in" + failed};
}

Verdict runtime_anchor() {
  const fs::path dir = scratch("runtime");
  save_png(synthetic_photo(800, 533, 909), dir / "photo.png");
  const auto t0 = std::chrono::steady_clock::now();
  const int code = run_cli("run-all " + (dir / "photo.png").string() + " -o " + (dir / "out").string() + " --threads 1");
  const double dt = seconds_since(t0);
  return {code == 0 && dt <= 15.0, "run-all on 800x533 took " + fmt("%.2f s", dt) + " (exit " + std::to_string(code) + ")"};
}

Verdict determinism() {
  const fs::path dir = scratch("determinism");
  const fs::path in = dir / "in";
  fs::create_directories(in);
  for (std::uint64_t s : {1, 2, 3}) save_png(synthetic_photo(240, 160 + 8 * s, s), in / ("img" + std::to_string(s) + ".png"));
  const std::string common = "run-all " + in.string() + " --seed 5 --dump-intermediates -o ";
  const int a = run_cli(common + (dir / "a").string() + " --threads 1");
  const int b = run_cli(common + (dir / "b").string() + " --threads 1");
  const int c = run_cli(common + (dir / "c").string() + " --threads 3");
  if (a || b || c) return {false, "run-all failed"};
  std::size_t files = 0, identical = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    ++files;
    const std::string ref = slurp(e.path());
    identical += ref == slurp(dir / "b" / e.path().filename()) && ref == slurp(dir / "c" / e.path().filename());
  }
  return {files == 24 && identical == files,
          std::to_string(identical) + "/" + std::to_string(files) + " files byte-identical across 3 runs (1, 1, 3 threads)"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"otsu matches exhaustive oracle", otsu_oracle},
      {"max-flow matches brute-force min cut", maxflow_oracle},
      {"guided and bilateral match direct oracles", filter_oracles},
      {"grabcut energy monotone, square exact", grabcut_monotone},
      {"published parameters honoured", paper_parameters},
      {"quantization bound and idempotence", quantization_bound},
      {"compositing accuracy and far field", compositing},
      {"content-aware flows leave the far field untouched", content_awareness},
      {"run-all runtime budget", runtime_anchor},
      {"deterministic outputs", determinism},
  };
  int failures = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << index << ". " << name << ": " << v.detail << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed")) << "\n";
  return failures ? 1 : 0;
}
