#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "canpr/compositing.hpp"
#include "canpr/error.hpp"
#include "canpr/filters.hpp"
#include "canpr/image.hpp"
#include "canpr/saliency.hpp"

namespace canpr {

struct GrabCutConfig {
  int max_iters = 10;
  std::uint64_t seed = 0;
  int pad = 5;  // bounding-box margin around the Otsu mask

  bool operator==(const GrabCutConfig&) const = default;
};

/// Background defocus: 9x9 Gaussian, sigma 4.
struct DefocusConfig {
  int radius = 4;
  double sigma = 4.0;

  bool operator==(const DefocusConfig&) const = default;
};

struct CompositingConfig {
  int feather_width = 5;
  double solver_tol = 1e-5;
  int solver_max_iters = 10000;
  CompositeMode exaggeration_mode = CompositeMode::GradientBlend;
  CompositeMode abstraction_mode = CompositeMode::Feather;

  bool operator==(const CompositingConfig&) const = default;
};

struct PipelineConfig {
  SaliencyParams saliency;
  GrabCutConfig grabcut;
  GuidedFilterParams guided;
  DefocusConfig defocus;
  AbstractionParams abstraction;
  CompositingConfig compositing;

  void validate() const;
  bool operator==(const PipelineConfig&) const = default;
};

/// JSON round trip. Missing keys keep their defaults; unknown keys are rejected.
std::string config_to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const PipelineConfig& cfg, const std::filesystem::path& path);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

/// Wall-clock record of pipeline stages. Errors escaping a timed stage are
/// re-thrown tagged with the stage name.
class StageLog {
 public:
  template <typename Fn>
  auto time(const std::string& stage, Fn&& fn) -> decltype(fn());

  const std::vector<StageTiming>& entries() const noexcept { return entries_; }
  void record(std::string stage, double seconds) { entries_.push_back({std::move(stage), seconds}); }

 private:
  std::vector<StageTiming> entries_;
};

struct SegmentationResult {
  SaliencyMap saliency;
  BinaryMask otsu_mask;
  BBox bbox;
  BinaryMask mask;
  std::vector<double> grabcut_energies;
};

SegmentationResult segment_salient(const ImageF& img, const PipelineConfig& cfg,
                                   StageLog* log = nullptr, const SaliencyBackend& backend = {});

struct RenderResult {
  ImageF image;
  std::vector<double> residuals;  // empty for feathered composites
};

enum class AbstractRegion { Foreground, Background };

RenderResult render_exaggerated(const ImageF& img, const BinaryMask& mask, const PipelineConfig& cfg,
                                StageLog* log = nullptr);
RenderResult render_exaggerated_defocus(const ImageF& img, const BinaryMask& mask,
                                        const PipelineConfig& cfg, StageLog* log = nullptr);
RenderResult render_abstracted(const ImageF& img, const BinaryMask& mask, const PipelineConfig& cfg,
                               AbstractRegion region, StageLog* log = nullptr);

struct RenderOutputs {
  std::optional<SaliencyMap> saliency_map;
  std::optional<BinaryMask> otsu_mask;
  std::optional<BinaryMask> mask;
  std::optional<BBox> bbox;
  std::optional<ImageF> exaggerated;
  std::optional<ImageF> exaggerated_defocus;
  std::optional<ImageF> fg_abstracted;
  std::optional<ImageF> bg_abstracted;
  std::vector<double> grabcut_energies;
  std::map<std::string, std::vector<double>> residuals;  // per flow, GradientBlend only
};

/// One saliency/segmentation pass shared by all three flows; the detail
/// layer and the abstraction are each computed once.
RenderOutputs run_all(const ImageF& img, const PipelineConfig& cfg, StageLog* log = nullptr);

// Stage names used in StageLog and error tags.
namespace stage {
inline constexpr const char* kSaliency = "saliency";
inline constexpr const char* kOtsu = "otsu";
inline constexpr const char* kBBox = "bbox";
inline constexpr const char* kGrabCut = "grabcut";
inline constexpr const char* kDetail = "detail-exaggeration";
inline constexpr const char* kDefocus = "defocus-blur";
inline constexpr const char* kAbstraction = "abstraction";
inline constexpr const char* kCompositeExaggerated = "composite-exaggerated";
inline constexpr const char* kCompositeDefocus = "composite-defocus";
inline constexpr const char* kCompositeAbstractFg = "composite-abstract-fg";
inline constexpr const char* kCompositeAbstractBg = "composite-abstract-bg";
}  // namespace stage

template <typename Fn>
auto StageLog::time(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&] {
    record(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      finish();
    } else {
      auto out = fn();
      finish();
      return out;
    }
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.in_stage(stage);
  }
}

}  // namespace canpr
