#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "motlab/box.hpp"
#include "motlab/sensing.hpp"

namespace motlab {

// Cosine similarity; rejects zero vectors.
double cosine(std::span<const double> a, std::span<const double> b);
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

enum class ScorerKind { iou, cosine, parametric };

const char* to_string(ScorerKind k);
ScorerKind scorer_kind_from_string(const std::string& s);

struct FeatureMask {
  bool use_appearance = true;
  bool use_motion = true;
};

// input -> hidden (ReLU) -> scalar sigmoid
struct Mlp {
  int input_dim = 7;
  int hidden_dim = 16;
  std::vector<double> w1;  // hidden x input, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;

  static Mlp init(int input_dim, int hidden_dim, std::uint64_t seed);
  double forward(std::span<const double> x) const;
  int param_count() const { return hidden_dim * input_dim + hidden_dim + hidden_dim + 1; }
  // flat layout: w1, b1, w2, b2
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> theta);
};

struct Scorer {
  ScorerKind kind = ScorerKind::iou;
  Mlp mlp;
  FeatureMask mask;
};

inline constexpr int kScorerInputDim = 7;  // [cosine, iou, motion(5)]

struct PairFeatures {
  double cosine_sim = 0.0;
  double iou_overlap = 0.0;
  MotionFeature motion;
};

// Assembles the parametric scorer input, substituting the all-ones dummy
// vector for masked feature groups.
std::array<double, kScorerInputDim> scorer_input(const PairFeatures& f, const FeatureMask& mask);

double score_pair(const Scorer& s, const PairFeatures& f);

struct ScoreMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> s;

  ScoreMatrix() = default;
  ScoreMatrix(int r, int c) : rows(r), cols(c), s(static_cast<std::size_t>(r) * c, 0.0) {}
  double& at(int i, int j) { return s[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return s[static_cast<std::size_t>(i) * cols + j]; }
};

struct Assignment {
  std::vector<std::pair<int, int>> matches;  // (row, col)
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
};

// Exact maximizer of sum(a_ij * s_ij) under one-to-one constraints (Hungarian
// on the negated, rectangular-padded matrix); pairs scoring below the
// threshold are demoted to unmatched afterwards.
Assignment solve_assignment(const ScoreMatrix& m, double threshold);

// Internal exact solver: min-cost perfect matching on a square cost matrix.
// row i -> match[i] = column. Exposed for tests.
std::vector<int> hungarian_min_cost(const std::vector<double>& cost, int n);

// --- Kalman-filtered tracklet ------------------------------------------------

using KState = Eigen::Matrix<double, 7, 1>;  // cx cy area aspect vx vy varea
using KCov = Eigen::Matrix<double, 7, 7>;

struct KalmanParams {
  double obs_rel = 1.0 / 20.0;      // observation sigma as fraction of box dimension
  double process_rel = 1.0 / 160.0; // process sigma as fraction of box dimension
};

enum class TrackStatus { tentative, confirmed, dead };

struct Tracklet {
  int track_id = 0;
  KState state = KState::Zero();
  KCov cov = KCov::Zero();
  Box last_box;                // last observed detection box
  int last_frame = 0;          // frame of last match
  AppearanceFeature appearance;
  int age = 0;                 // frames since last match
  int hits = 0;
  TrackStatus status = TrackStatus::tentative;
};

Box state_to_box(const KState& s);
KState box_to_state(const Box& b);

Tracklet make_tracklet(int id, const Box& box, const AppearanceFeature& feat, int frame,
                       const KalmanParams& params = {});
Tracklet kalman_predict(const Tracklet& t, const KalmanParams& params = {});
Tracklet kalman_update(const Tracklet& t, const Box& observed, const KalmanParams& params = {});

// Scores every (tracklet, detection) pair; tracklets must be freshly
// predicted so the iou route sees the predicted box.
ScoreMatrix score_matrix(const std::vector<Tracklet>& tracklets,
                         const std::vector<Detection>& detections,
                         const std::vector<AppearanceFeature>& features, int frame,
                         const Scorer& scorer, double fps);

struct TrackerConfig {
  Scorer scorer;
  double match_threshold = 0.3;
  int max_age = 1;
  int min_hits = 3;
  double appearance_ema = 0.9;
  double fps = 30.0;
  KalmanParams kalman;
};

void validate(const TrackerConfig& cfg);

struct TrackedBox {
  int track_id = 0;
  Box box;
};

// SORT-style online tracking: predict, score, assign, update, manage birth
// and death. Confirmed tracklets emit their posterior box on matched frames.
std::vector<std::vector<TrackedBox>> track_sequence(const std::vector<ObservedFrame>& frames,
                                                    const TrackerConfig& cfg);

// --- Parametric scorer training ----------------------------------------------

struct TrainParams {
  double lr = 0.05;
  int epochs = 20;
  int neg_per_pos = 3;
  int batch_size = 64;
  int k_max = 3;     // positive pairs span frames (t, t+k), k <= k_max
  int hidden = 16;
  std::uint64_t seed = 1;
};

struct LabelledPair {
  std::array<double, kScorerInputDim> x{};
  double y = 0.0;
};

// Positives: same identity across nearby frames; negatives sampled from
// different-identity pairs in the same window. Clutter is excluded.
std::vector<LabelledPair> build_pairs(const std::vector<ObservedFrame>& frames,
                                      const FeatureMask& mask, double fps, int k_max,
                                      int neg_per_pos, Rng& rng);

// Mean binary cross-entropy over the batch and its gradient in flat layout.
double bce_loss_and_gradient(const Mlp& mlp, std::span<const LabelledPair> batch,
                             std::vector<double>& grad);

struct TrainResult {
  Scorer scorer;
  std::vector<double> loss_curve;  // mean loss per epoch
};

// Mini-batch gradient descent on binary cross-entropy; deterministic in
// params.seed. Throws on degenerate data (no positive pairs).
TrainResult train_scorer(const std::vector<std::vector<ObservedFrame>>& sequences,
                         const TrainParams& params, const FeatureMask& mask, double fps);

}  // namespace motlab
