#include <cmath>
#include <numeric>
#include <stdexcept>

#include "motlab/assoc.hpp"

namespace motlab {

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na <= 0.0 || nb <= 0.0) throw std::invalid_argument("cosine: zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return cosine(std::span<const double>(a.data(), a.size()),
                std::span<const double>(b.data(), b.size()));
}

const char* to_string(ScorerKind k) {
  switch (k) {
    case ScorerKind::iou: return "iou";
    case ScorerKind::cosine: return "cosine";
    default: return "parametric";
  }
}

ScorerKind scorer_kind_from_string(const std::string& s) {
  if (s == "iou") return ScorerKind::iou;
  if (s == "cosine") return ScorerKind::cosine;
  if (s == "parametric") return ScorerKind::parametric;
  throw std::invalid_argument("scorer: expected iou|cosine|parametric, got '" + s + "'");
}

Mlp Mlp::init(int input_dim, int hidden_dim, std::uint64_t seed) {
  Mlp m;
  m.input_dim = input_dim;
  m.hidden_dim = hidden_dim;
  m.w1.resize(static_cast<std::size_t>(hidden_dim) * input_dim);
  m.b1.assign(hidden_dim, 0.0);
  m.w2.resize(hidden_dim);
  Rng rng(seed);
  const double s1 = std::sqrt(6.0 / (input_dim + hidden_dim));
  for (auto& w : m.w1) w = rng.uniform(-s1, s1);
  const double s2 = std::sqrt(6.0 / (hidden_dim + 1));
  for (auto& w : m.w2) w = rng.uniform(-s2, s2);
  m.b2 = 0.0;
  return m;
}

double Mlp::forward(std::span<const double> x) const {
  double z2 = b2;
  for (int h = 0; h < hidden_dim; ++h) {
    double z1 = b1[h];
    const double* row = &w1[static_cast<std::size_t>(h) * input_dim];
    for (int i = 0; i < input_dim; ++i) z1 += row[i] * x[i];
    if (z1 > 0.0) z2 += w2[h] * z1;
  }
  return 1.0 / (1.0 + std::exp(-z2));
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> theta;
  theta.reserve(param_count());
  theta.insert(theta.end(), w1.begin(), w1.end());
  theta.insert(theta.end(), b1.begin(), b1.end());
  theta.insert(theta.end(), w2.begin(), w2.end());
  theta.push_back(b2);
  return theta;
}

void Mlp::unflatten(std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != param_count())
    throw std::invalid_argument("mlp: theta size mismatch");
  std::size_t k = 0;
  for (auto& w : w1) w = theta[k++];
  for (auto& b : b1) b = theta[k++];
  for (auto& w : w2) w = theta[k++];
  b2 = theta[k];
}

std::array<double, kScorerInputDim> scorer_input(const PairFeatures& f, const FeatureMask& mask) {
  std::array<double, kScorerInputDim> x;
  x[0] = mask.use_appearance ? f.cosine_sim : 1.0;
  if (mask.use_motion) {
    x[1] = f.iou_overlap;
    for (int i = 0; i < 5; ++i) x[2 + i] = f.motion.v[i];
  } else {
    for (int i = 1; i < kScorerInputDim; ++i) x[i] = 1.0;
  }
  return x;
}

double score_pair(const Scorer& s, const PairFeatures& f) {
  switch (s.kind) {
    case ScorerKind::iou:
      return s.mask.use_motion ? f.iou_overlap : 1.0;
    case ScorerKind::cosine:
      return s.mask.use_appearance ? f.cosine_sim : 1.0;
    default: {
      const auto x = scorer_input(f, s.mask);
      return s.mlp.forward(x);
    }
  }
}

ScoreMatrix score_matrix(const std::vector<Tracklet>& tracklets,
                         const std::vector<Detection>& detections,
                         const std::vector<AppearanceFeature>& features, int frame,
                         const Scorer& scorer, double fps) {
  if (features.size() != detections.size())
    throw std::invalid_argument("score_matrix: features/detections size mismatch");
  const bool needs_appearance =
      scorer.mask.use_appearance && scorer.kind != ScorerKind::iou;
  ScoreMatrix m(static_cast<int>(tracklets.size()), static_cast<int>(detections.size()));
  for (int i = 0; i < m.rows; ++i) {
    const Tracklet& t = tracklets[i];
    const Box pred = state_to_box(t.state);
    for (int j = 0; j < m.cols; ++j) {
      PairFeatures f;
      if (needs_appearance) f.cosine_sim = cosine(t.appearance.v, features[j].v);
      f.iou_overlap = iou(pred, detections[j].box);
      f.motion = motion_feature(pred, t.last_frame, detections[j].box, frame, fps);
      m.at(i, j) = score_pair(scorer, f);
    }
  }
  return m;
}

namespace {

// numerically stable BCE from the logit: softplus(z) - y*z
double bce_from_logit(double z, double y) {
  const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return softplus - y * z;
}

}  // namespace

double bce_loss_and_gradient(const Mlp& mlp, std::span<const LabelledPair> batch,
                             std::vector<double>& grad) {
  grad.assign(mlp.param_count(), 0.0);
  if (batch.empty()) return 0.0;
  const int in = mlp.input_dim, hid = mlp.hidden_dim;
  double* gw1 = grad.data();
  double* gb1 = gw1 + static_cast<std::size_t>(hid) * in;
  double* gw2 = gb1 + hid;
  double* gb2 = gw2 + hid;

  std::vector<double> a(hid);
  double loss = 0.0;
  for (const LabelledPair& p : batch) {
    double z2 = mlp.b2;
    for (int h = 0; h < hid; ++h) {
      double z1 = mlp.b1[h];
      const double* row = &mlp.w1[static_cast<std::size_t>(h) * in];
      for (int i = 0; i < in; ++i) z1 += row[i] * p.x[i];
      a[h] = z1 > 0.0 ? z1 : 0.0;
      z2 += mlp.w2[h] * a[h];
    }
    loss += bce_from_logit(z2, p.y);
    const double prob = 1.0 / (1.0 + std::exp(-z2));
    const double dz2 = prob - p.y;
    *gb2 += dz2;
    for (int h = 0; h < hid; ++h) {
      gw2[h] += dz2 * a[h];
      if (a[h] > 0.0) {
        const double dz1 = dz2 * mlp.w2[h];
        gb1[h] += dz1;
        double* grow = &gw1[static_cast<std::size_t>(h) * in];
        for (int i = 0; i < in; ++i) grow[i] += dz1 * p.x[i];
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grad) g *= inv;
  return loss * inv;
}

std::vector<LabelledPair> build_pairs(const std::vector<ObservedFrame>& frames,
                                      const FeatureMask& mask, double fps, int k_max,
                                      int neg_per_pos, Rng& rng) {
  std::vector<LabelledPair> out;
  const int n = static_cast<int>(frames.size());
  for (int t = 0; t < n; ++t) {
    for (int k = 1; k <= k_max && t + k < n; ++k) {
      const auto& cur = frames[t];
      const auto& nxt = frames[t + k];
      for (std::size_t i = 0; i < cur.dets.size(); ++i) {
        if (cur.dets[i].true_identity == kClutterIdentity) continue;
        int match = -1;
        for (std::size_t j = 0; j < nxt.dets.size(); ++j)
          if (nxt.dets[j].true_identity == cur.dets[i].true_identity) {
            match = static_cast<int>(j);
            break;
          }
        if (match < 0) continue;

        auto features = [&](std::size_t j) {
          PairFeatures f;
          f.cosine_sim = cosine(cur.feats[i].v, nxt.feats[j].v);
          f.iou_overlap = iou(cur.dets[i].box, nxt.dets[j].box);
          f.motion = motion_feature(cur.dets[i].box, t, nxt.dets[j].box, t + k, fps);
          return f;
        };
        out.push_back({scorer_input(features(match), mask), 1.0});

        std::vector<int> candidates;
        for (std::size_t j = 0; j < nxt.dets.size(); ++j)
          if (nxt.dets[j].true_identity != kClutterIdentity &&
              nxt.dets[j].true_identity != cur.dets[i].true_identity)
            candidates.push_back(static_cast<int>(j));
        for (int s = 0; s < neg_per_pos && !candidates.empty(); ++s) {
          const int j = candidates[rng.uniform_int(0, static_cast<int>(candidates.size()) - 1)];
          out.push_back({scorer_input(features(j), mask), 0.0});
        }
      }
    }
  }
  return out;
}

TrainResult train_scorer(const std::vector<std::vector<ObservedFrame>>& sequences,
                         const TrainParams& params, const FeatureMask& mask, double fps) {
  Rng rng(derive_seed(params.seed, 0x7e1));
  std::vector<LabelledPair> pairs;
  for (const auto& seq : sequences) {
    auto p = build_pairs(seq, mask, fps, params.k_max, params.neg_per_pos, rng);
    pairs.insert(pairs.end(), p.begin(), p.end());
  }
  const bool has_positive =
      std::any_of(pairs.begin(), pairs.end(), [](const LabelledPair& p) { return p.y > 0.5; });
  if (!has_positive) throw std::invalid_argument("train_scorer: no positive pairs in data");

  Mlp mlp = Mlp::init(kScorerInputDim, params.hidden, derive_seed(params.seed, 0x317));
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad, theta;
  std::vector<LabelledPair> batch;
  std::vector<double> curve;

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    // Fisher-Yates with our own rng, for portable determinism
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < order.size(); start += params.batch_size) {
      const std::size_t stop = std::min(order.size(), start + params.batch_size);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(pairs[order[k]]);
      bce_loss_and_gradient(mlp, batch, grad);
      theta = mlp.flatten();
      for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= params.lr * grad[k];
      mlp.unflatten(theta);
    }
    curve.push_back(bce_loss_and_gradient(mlp, pairs, grad));
  }

  TrainResult res;
  res.scorer.kind = ScorerKind::parametric;
  res.scorer.mlp = mlp;
  res.scorer.mask = mask;
  res.loss_curve = curve;
  return res;
}

}  // namespace motlab
