#include "canpr/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "canpr/segmentation/grabcut.hpp"
#include "json.hpp"

namespace canpr {

namespace {

using nlohmann::json;

template <typename Fn>
auto timed(StageLog* log, const char* name, Fn&& fn) -> decltype(fn()) {
  StageLog scratch;
  return (log ? *log : scratch).time(name, std::forward<Fn>(fn));
}

void require_mask(const ImageF& img, const BinaryMask& mask) {
  if (mask.width() != img.width() || mask.height() != img.height()) {
    throw_invalid("mask size differs from the image");
  }
  if (mask.none()) throw_invalid("render needs a non-empty mask");
}

RenderResult composite_flow(const ImageF& source, const ImageF& dest, const BinaryMask& mask,
                            CompositeMode mode, const CompositingConfig& cfg) {
  CompositeRequest req;
  req.source = &source;
  req.dest = &dest;
  req.mask = &mask;
  req.mode = mode;
  req.feather_width = cfg.feather_width;
  req.solver_tol = cfg.solver_tol;
  req.solver_max_iters = cfg.solver_max_iters;
  CompositeResult res = composite(req);
  return {std::move(res.image), std::move(res.residuals)};
}

ImageF defocus(const ImageF& img, const DefocusConfig& cfg) {
  return gaussian_blur(img, cfg.radius, cfg.sigma);
}

const char* mode_name(CompositeMode m) {
  return m == CompositeMode::Feather ? "feather" : "gradient";
}

CompositeMode parse_mode(const std::string& s) {
  if (s == "feather") return CompositeMode::Feather;
  if (s == "gradient") return CompositeMode::GradientBlend;
  throw_invalid("unknown compositing mode '" + s + "' (expected feather or gradient)");
}

// Reads `key` into `out` when present; records the key as consumed.
template <typename T>
void read(const json& obj, const char* key, T& out, std::vector<std::string>& seen) {
  seen.emplace_back(key);
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw_invalid(std::string("config key '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& obj, const std::string& section, const std::vector<std::string>& seen) {
  if (!obj.is_object()) throw_invalid("config section '" + section + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
      throw_invalid("unknown config key '" + (section.empty() ? key : section + "." + key) + "'");
    }
  }
}

}  // namespace

void PipelineConfig::validate() const {
  saliency.validate();
  guided.validate();
  abstraction.validate();
  if (grabcut.max_iters < 1) throw_invalid("grabcut.max_iters must be >= 1");
  if (grabcut.pad < 0) throw_invalid("grabcut.pad must be >= 0");
  if (defocus.radius < 0 || !(defocus.sigma > 0)) throw_invalid("defocus needs radius >= 0 and sigma > 0");
  if (compositing.feather_width < 0) throw_invalid("compositing.feather_width must be >= 0");
  if (!(compositing.solver_tol > 0) || compositing.solver_max_iters < 1) {
    throw_invalid("compositing solver settings must be positive");
  }
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["saliency"] = {{"grid_width", c.saliency.grid_width},
                   {"sigma_frac", c.saliency.sigma_frac},
                   {"weight_floor", c.saliency.weight_floor},
                   {"power_tol", c.saliency.power_tol},
                   {"power_max_iters", c.saliency.power_max_iters}};
  j["grabcut"] = {{"max_iters", c.grabcut.max_iters}, {"seed", c.grabcut.seed}, {"pad", c.grabcut.pad}};
  j["guided"] = {{"radius", c.guided.radius}, {"epsilon", c.guided.epsilon}, {"boost", c.guided.boost}};
  j["defocus"] = {{"radius", c.defocus.radius},
                  {"kernel_size", 2 * c.defocus.radius + 1},
                  {"sigma", c.defocus.sigma}};
  j["abstraction"] = {{"spatial_sigma", c.abstraction.spatial_sigma},
                      {"range_sigma", c.abstraction.range_sigma},
                      {"quant_levels", c.abstraction.quant_levels},
                      {"bilateral_iterations", c.abstraction.bilateral_iterations},
                      {"dog_sigma", c.abstraction.dog_sigma},
                      {"dog_ratio", c.abstraction.dog_ratio},
                      {"dog_tau", c.abstraction.dog_tau},
                      {"dog_sharpness", c.abstraction.dog_sharpness}};
  j["compositing"] = {{"feather_width", c.compositing.feather_width},
                      {"solver_tol", c.compositing.solver_tol},
                      {"solver_max_iters", c.compositing.solver_max_iters},
                      {"exaggeration_mode", mode_name(c.compositing.exaggeration_mode)},
                      {"abstraction_mode", mode_name(c.compositing.abstraction_mode)}};
  return j.dump(2) + "\n";
}

PipelineConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw_invalid(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, "", {"saliency", "grabcut", "guided", "defocus", "abstraction", "compositing"});

  PipelineConfig c;
  auto section = [&](const char* name, auto&& body) {
    if (!j.contains(name)) return;
    const json& s = j.at(name);
    std::vector<std::string> seen;
    if (s.is_object()) body(s, seen);
    reject_unknown(s, name, seen);
  };
  section("saliency", [&](const json& s, auto& seen) {
    read(s, "grid_width", c.saliency.grid_width, seen);
    read(s, "sigma_frac", c.saliency.sigma_frac, seen);
    read(s, "weight_floor", c.saliency.weight_floor, seen);
    read(s, "power_tol", c.saliency.power_tol, seen);
    read(s, "power_max_iters", c.saliency.power_max_iters, seen);
  });
  section("grabcut", [&](const json& s, auto& seen) {
    read(s, "max_iters", c.grabcut.max_iters, seen);
    read(s, "seed", c.grabcut.seed, seen);
    read(s, "pad", c.grabcut.pad, seen);
  });
  section("guided", [&](const json& s, auto& seen) {
    read(s, "radius", c.guided.radius, seen);
    read(s, "epsilon", c.guided.epsilon, seen);
    read(s, "boost", c.guided.boost, seen);
  });
  section("defocus", [&](const json& s, auto& seen) {
    read(s, "radius", c.defocus.radius, seen);
    read(s, "sigma", c.defocus.sigma, seen);
    int kernel_size = 2 * c.defocus.radius + 1;
    read(s, "kernel_size", kernel_size, seen);
    if (kernel_size != 2 * c.defocus.radius + 1) {
      throw_invalid("defocus.kernel_size must equal 2*radius+1");
    }
  });
  section("abstraction", [&](const json& s, auto& seen) {
    read(s, "spatial_sigma", c.abstraction.spatial_sigma, seen);
    read(s, "range_sigma", c.abstraction.range_sigma, seen);
    read(s, "quant_levels", c.abstraction.quant_levels, seen);
    read(s, "bilateral_iterations", c.abstraction.bilateral_iterations, seen);
    read(s, "dog_sigma", c.abstraction.dog_sigma, seen);
    read(s, "dog_ratio", c.abstraction.dog_ratio, seen);
    read(s, "dog_tau", c.abstraction.dog_tau, seen);
    read(s, "dog_sharpness", c.abstraction.dog_sharpness, seen);
  });
  section("compositing", [&](const json& s, auto& seen) {
    read(s, "feather_width", c.compositing.feather_width, seen);
    read(s, "solver_tol", c.compositing.solver_tol, seen);
    read(s, "solver_max_iters", c.compositing.solver_max_iters, seen);
    std::string ex = mode_name(c.compositing.exaggeration_mode);
    std::string ab = mode_name(c.compositing.abstraction_mode);
    read(s, "exaggeration_mode", ex, seen);
    read(s, "abstraction_mode", ab, seen);
    c.compositing.exaggeration_mode = parse_mode(ex);
    c.compositing.abstraction_mode = parse_mode(ab);
  });
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void save_config(const PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write config: " + path.string());
  out << config_to_json(cfg);
}

SegmentationResult segment_salient(const ImageF& img, const PipelineConfig& cfg, StageLog* log,
                                   const SaliencyBackend& backend) {
  cfg.validate();
  SegmentationResult out;
  out.saliency = timed(log, stage::kSaliency, [&] {
    return backend ? backend(img, cfg.saliency) : saliency_map(img, cfg.saliency);
  });
  out.otsu_mask = timed(log, stage::kOtsu, [&] { return otsu_threshold(out.saliency).mask; });
  out.bbox = timed(log, stage::kBBox, [&] { return bounding_box(out.otsu_mask, cfg.grabcut.pad); });
  auto cut = timed(log, stage::kGrabCut, [&] {
    GrabCutOptions opts;
    opts.max_iters = cfg.grabcut.max_iters;
    opts.seed = cfg.grabcut.seed;
    return grabcut(img, out.bbox, opts);
  });
  out.mask = std::move(cut.mask);
  out.grabcut_energies = std::move(cut.energies);
  return out;
}

RenderResult render_exaggerated(const ImageF& img, const BinaryMask& mask, const PipelineConfig& cfg,
                                StageLog* log) {
  cfg.validate();
  require_mask(img, mask);
  const ImageF boosted = timed(log, stage::kDetail, [&] { return detail_exaggerate(img, cfg.guided); });
  return timed(log, stage::kCompositeExaggerated, [&] {
    return composite_flow(boosted, img, mask, cfg.compositing.exaggeration_mode, cfg.compositing);
  });
}

RenderResult render_exaggerated_defocus(const ImageF& img, const BinaryMask& mask,
                                        const PipelineConfig& cfg, StageLog* log) {
  cfg.validate();
  require_mask(img, mask);
  const ImageF blurred = timed(log, stage::kDefocus, [&] { return defocus(img, cfg.defocus); });
  const ImageF boosted = timed(log, stage::kDetail, [&] { return detail_exaggerate(img, cfg.guided); });
  return timed(log, stage::kCompositeDefocus, [&] {
    return composite_flow(boosted, blurred, mask, cfg.compositing.exaggeration_mode, cfg.compositing);
  });
}

RenderResult render_abstracted(const ImageF& img, const BinaryMask& mask, const PipelineConfig& cfg,
                               AbstractRegion region, StageLog* log) {
  cfg.validate();
  require_mask(img, mask);
  const ImageF abstracted = timed(log, stage::kAbstraction, [&] { return abstract_image(img, cfg.abstraction); });
  const BinaryMask effective = region == AbstractRegion::Foreground ? mask : mask.inverted();
  const char* name = region == AbstractRegion::Foreground ? stage::kCompositeAbstractFg : stage::kCompositeAbstractBg;
  return timed(log, name, [&] {
    return composite_flow(abstracted, img, effective, cfg.compositing.abstraction_mode, cfg.compositing);
  });
}

RenderOutputs run_all(const ImageF& img, const PipelineConfig& cfg, StageLog* log) {
  cfg.validate();
  RenderOutputs out;
  SegmentationResult seg = segment_salient(img, cfg, log);
  if (seg.mask.none()) throw Error(ErrorKind::DegenerateInput, "empty segmentation mask", stage::kGrabCut);

  const BinaryMask& mask = seg.mask;
  const CompositingConfig& cc = cfg.compositing;
  const ImageF boosted = timed(log, stage::kDetail, [&] { return detail_exaggerate(img, cfg.guided); });
  const ImageF blurred = timed(log, stage::kDefocus, [&] { return defocus(img, cfg.defocus); });
  const ImageF abstracted = timed(log, stage::kAbstraction, [&] { return abstract_image(img, cfg.abstraction); });

  auto exag = timed(log, stage::kCompositeExaggerated,
                    [&] { return composite_flow(boosted, img, mask, cc.exaggeration_mode, cc); });
  auto defoc = timed(log, stage::kCompositeDefocus,
                     [&] { return composite_flow(boosted, blurred, mask, cc.exaggeration_mode, cc); });
  const BinaryMask background = mask.inverted();
  auto fg = timed(log, stage::kCompositeAbstractFg,
                  [&] { return composite_flow(abstracted, img, mask, cc.abstraction_mode, cc); });
  auto bg = timed(log, stage::kCompositeAbstractBg,
                  [&] { return composite_flow(abstracted, img, background, cc.abstraction_mode, cc); });

  out.residuals["exaggerated"] = std::move(exag.residuals);
  out.residuals["defocus"] = std::move(defoc.residuals);
  out.residuals["abstract-fg"] = std::move(fg.residuals);
  out.residuals["abstract-bg"] = std::move(bg.residuals);
  out.exaggerated = std::move(exag.image);
  out.exaggerated_defocus = std::move(defoc.image);
  out.fg_abstracted = std::move(fg.image);
  out.bg_abstracted = std::move(bg.image);
  out.saliency_map = std::move(seg.saliency);
  out.otsu_mask = std::move(seg.otsu_mask);
  out.bbox = seg.bbox;
  out.mask = std::move(seg.mask);
  out.grabcut_energies = std::move(seg.grabcut_energies);
  return out;
}

}  // namespace canpr
