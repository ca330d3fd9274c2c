#include "motlab/sensing.hpp"

#include <cmath>
#include <stdexcept>

namespace motlab {

AppearanceFeature normalized(Eigen::VectorXd v) {
  const double n = v.norm();
  if (n <= 0.0) throw std::invalid_argument("appearance vector: zero norm");
  return AppearanceFeature{v / n};
}

AppearanceFeature random_unit(int dim, Rng& rng) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  return normalized(std::move(v));
}

Eigen::MatrixXd random_rotation(int dim, Rng& rng) {
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // fix signs so the factorization is unique and proper
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i)
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  return q;
}

DomainShift make_shift(int dim, double bias_sigma, double noise_sigma, std::uint64_t seed) {
  Rng rng(seed);
  DomainShift s;
  s.rotation = random_rotation(dim, rng);
  s.bias = Eigen::VectorXd::Zero(dim);
  if (bias_sigma > 0.0)
    for (int i = 0; i < dim; ++i) s.bias[i] = rng.normal(0.0, bias_sigma);
  s.noise_sigma = noise_sigma;
  return s;
}

AppearanceFeature appearance_embedding(const AppearanceFeature& latent,
                                       const std::optional<DomainShift>& shift, Rng& rng) {
  if (!shift) return latent;
  Eigen::VectorXd v = shift->rotation * latent.v + shift->bias;
  if (shift->noise_sigma > 0.0)
    for (int i = 0; i < v.size(); ++i) v[i] += rng.normal(0.0, shift->noise_sigma);
  return normalized(std::move(v));
}

const AppearanceFeature& LatentTable::latent(int identity) const {
  int key = identity;
  if (auto it = relabel_.find(identity); it != relabel_.end()) key = it->second;
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    Rng rng(derive_seed(seed_, 0x1a7e, static_cast<std::uint64_t>(key)));
    it = cache_.emplace(key, random_unit(dim_, rng)).first;
  }
  return it->second;
}

LatentTable LatentTable::permuted(const std::map<int, int>& relabel) const {
  LatentTable t(dim_, seed_);
  t.relabel_ = relabel;
  return t;
}

void validate(const NoiseParams& p) {
  if (p.fn_prob < 0.0 || p.fn_prob > 1.0) throw std::invalid_argument("fn_prob: must be in [0,1]");
  if (p.center_sigma_rel < 0.0) throw std::invalid_argument("center_sigma_rel: must be >= 0");
  if (p.size_sigma_rel < 0.0) throw std::invalid_argument("size_sigma_rel: must be >= 0");
  if (p.fp_per_frame < 0.0) throw std::invalid_argument("fp_per_frame: must be >= 0");
  if (p.visibility_cutoff < 0.0 || p.visibility_cutoff > 1.0)
    throw std::invalid_argument("visibility_cutoff: must be in [0,1]");
}

std::vector<std::vector<Detection>> perturb_detections(const SequenceTruth& truth,
                                                       const NoiseParams& noise,
                                                       std::uint64_t seed) {
  validate(noise);
  Rng rng(seed);
  const int w = truth.config.width, h = truth.config.height;
  std::vector<std::vector<Detection>> out(truth.frames.size());

  for (std::size_t f = 0; f < truth.frames.size(); ++f) {
    for (const GtBox& gt : truth.frames[f]) {
      if (gt.visibility <= noise.visibility_cutoff) continue;
      if (noise.fn_prob > 0.0 && rng.uniform() < noise.fn_prob) continue;
      Box b = gt.visible_box;
      if (noise.center_sigma_rel > 0.0) {
        b.left += rng.normal(0.0, noise.center_sigma_rel * b.width);
        b.top += rng.normal(0.0, noise.center_sigma_rel * b.height);
      }
      if (noise.size_sigma_rel > 0.0) {
        const double cx = b.cx(), cy = b.cy();
        b.width = std::max(1.0, b.width * (1.0 + rng.normal(0.0, noise.size_sigma_rel)));
        b.height = std::max(1.0, b.height * (1.0 + rng.normal(0.0, noise.size_sigma_rel)));
        b.left = cx - 0.5 * b.width;
        b.top = cy - 0.5 * b.height;
      }
      b = clip_to_image(b, w, h);
      if (b.empty()) continue;
      out[f].push_back(Detection{static_cast<int>(f), b, 1.0, gt.identity});
    }
    const int clutter = rng.poisson(noise.fp_per_frame);
    for (int k = 0; k < clutter; ++k) {
      const double bh = rng.uniform(30.0, 200.0);
      const double bw = bh * rng.uniform(0.3, 0.5);
      const double cx = rng.uniform(0.0, static_cast<double>(w));
      const double cy = rng.uniform(0.0, static_cast<double>(h));
      Box b{cx - 0.5 * bw, cy - 0.5 * bh, bw, bh};
      b = clip_to_image(b, w, h);
      if (b.empty()) continue;
      out[f].push_back(Detection{static_cast<int>(f), b, 0.5, kClutterIdentity});
    }
  }
  return out;
}

MotionFeature motion_feature(const Box& box_i, int frame_i, const Box& box_j, int frame_j,
                             double fps) {
  if (box_i.width <= 0.0 || box_i.height <= 0.0 || box_j.width <= 0.0 || box_j.height <= 0.0)
    throw std::invalid_argument("motion_feature: zero-sized box");
  const double h = 0.5 * (box_i.height + box_j.height);
  MotionFeature m;
  m.v[0] = (box_j.cx() - box_i.cx()) / h;
  m.v[1] = (box_j.cy() - box_i.cy()) / h;
  m.v[2] = std::log(box_j.width / box_i.width);
  m.v[3] = std::log(box_j.height / box_i.height);
  m.v[4] = static_cast<double>(frame_j - frame_i) / fps;
  return m;
}

std::vector<ObservedFrame> observe_sequence(const SequenceTruth& truth, const SensingConfig& cfg,
                                            std::uint64_t seed) {
  const LatentTable latents(cfg.embed_dim, derive_seed(truth.config.seed, 0xfea7));
  return observe_sequence(truth, cfg, seed, latents);
}

std::vector<ObservedFrame> observe_sequence(const SequenceTruth& truth, const SensingConfig& cfg,
                                            std::uint64_t seed, const LatentTable& latents) {
  const auto dets = perturb_detections(truth, cfg.noise, derive_seed(seed, 0xde7));
  Rng embed_rng(derive_seed(seed, 0xe3b));
  std::vector<ObservedFrame> out(dets.size());
  for (std::size_t f = 0; f < dets.size(); ++f) {
    out[f].dets = dets[f];
    out[f].feats.reserve(dets[f].size());
    for (const Detection& d : dets[f]) {
      if (d.true_identity == kClutterIdentity)
        out[f].feats.push_back(random_unit(cfg.embed_dim, embed_rng));
      else
        out[f].feats.push_back(appearance_embedding(latents.latent(d.true_identity), cfg.shift,
                                                    embed_rng));
    }
  }
  return out;
}

}  // namespace motlab
