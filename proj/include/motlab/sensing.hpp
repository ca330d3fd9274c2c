#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "motlab/box.hpp"
#include "motlab/rng.hpp"
#include "motlab/sim.hpp"

namespace motlab {

inline constexpr int kClutterIdentity = -1;

// Detector-like observation. true_identity is hidden from trackers; it feeds
// metrics and pair labelling only.
struct Detection {
  int frame = 0;
  Box box;
  double confidence = 1.0;
  int true_identity = kClutterIdentity;
};

// Unit-norm appearance embedding.
struct AppearanceFeature {
  Eigen::VectorXd v;
};

AppearanceFeature normalized(Eigen::VectorXd v);
AppearanceFeature random_unit(int dim, Rng& rng);

// Models the sim-to-real appearance gap: an orthogonal rotation of the
// embedding space plus bias and isotropic noise.
struct DomainShift {
  Eigen::MatrixXd rotation;
  Eigen::VectorXd bias;
  double noise_sigma = 0.0;
};

Eigen::MatrixXd random_rotation(int dim, Rng& rng);
DomainShift make_shift(int dim, double bias_sigma, double noise_sigma, std::uint64_t seed);

// normalize(rotation * latent + bias + noise); without a shift the latent is
// returned unchanged.
AppearanceFeature appearance_embedding(const AppearanceFeature& latent,
                                       const std::optional<DomainShift>& shift, Rng& rng);

// One fixed random unit latent per identity, derived from a seed.
class LatentTable {
 public:
  LatentTable(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}
  const AppearanceFeature& latent(int identity) const;
  // Same latents, reassigned by identity -> identity map (for blinding checks).
  LatentTable permuted(const std::map<int, int>& relabel) const;
  int dim() const { return dim_; }

 private:
  int dim_;
  std::uint64_t seed_;
  mutable std::map<int, AppearanceFeature> cache_;
  std::map<int, int> relabel_;
};

struct NoiseParams {
  double center_sigma_rel = 0.0;  // center jitter, relative to box size
  double size_sigma_rel = 0.0;    // multiplicative size jitter
  double fn_prob = 0.0;           // per-box miss probability
  double fp_per_frame = 0.0;      // Poisson mean of clutter boxes per frame
  double visibility_cutoff = 0.25;
};

void validate(const NoiseParams& p);

// Jittered visible boxes plus Poisson clutter; deterministic in seed.
std::vector<std::vector<Detection>> perturb_detections(const SequenceTruth& truth,
                                                       const NoiseParams& noise,
                                                       std::uint64_t seed);

// (dx/h, dy/h, log w ratio, log h ratio, frame gap / fps); h is the mean box
// height. Antisymmetric in dx, dy, dt and the log ratios under argument swap.
struct MotionFeature {
  std::array<double, 5> v{};
};

MotionFeature motion_feature(const Box& box_i, int frame_i, const Box& box_j, int frame_j,
                             double fps);

struct ObservedFrame {
  std::vector<Detection> dets;
  std::vector<AppearanceFeature> feats;
};

struct SensingConfig {
  NoiseParams noise;
  int embed_dim = 32;
  std::optional<DomainShift> shift;
};

// Full detector stand-in: perturbed detections with appearance embeddings
// attached (identity latents through the optional shift; fresh random unit
// vectors for clutter).
std::vector<ObservedFrame> observe_sequence(const SequenceTruth& truth, const SensingConfig& cfg,
                                            std::uint64_t seed);
std::vector<ObservedFrame> observe_sequence(const SequenceTruth& truth, const SensingConfig& cfg,
                                            std::uint64_t seed, const LatentTable& latents);

}  // namespace motlab
