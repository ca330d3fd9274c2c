#include <cmath>

#include "motlab/assoc.hpp"

namespace motlab {

namespace {

constexpr double kMinArea = 1.0;
constexpr double kMinAspect = 0.05;

Eigen::Matrix<double, 7, 7> transition() {
  Eigen::Matrix<double, 7, 7> f = Eigen::Matrix<double, 7, 7>::Identity();
  f(0, 4) = 1.0;
  f(1, 5) = 1.0;
  f(2, 6) = 1.0;
  return f;
}

// characteristic box dimension of a state, for noise scaling
double state_dim(const KState& s) {
  const Box b = state_to_box(s);
  return 0.5 * (b.width + b.height);
}

}  // namespace

Box state_to_box(const KState& s) {
  const double area = std::max(s(2), kMinArea);
  const double aspect = std::max(s(3), kMinAspect);
  const double w = std::sqrt(area * aspect);
  const double h = std::sqrt(area / aspect);
  return Box{s(0) - 0.5 * w, s(1) - 0.5 * h, w, h};
}

KState box_to_state(const Box& b) {
  KState s = KState::Zero();
  s(0) = b.cx();
  s(1) = b.cy();
  s(2) = b.area();
  s(3) = b.width / b.height;
  return s;
}

Tracklet make_tracklet(int id, const Box& box, const AppearanceFeature& feat, int frame,
                       const KalmanParams& params) {
  (void)params;
  Tracklet t;
  t.track_id = id;
  t.state = box_to_state(box);
  const double d = 0.5 * (box.width + box.height);
  const double area = t.state(2), aspect = t.state(3);
  KState var;
  // weak position prior, essentially uninformative velocity prior
  var << (d / 10.0) * (d / 10.0), (d / 10.0) * (d / 10.0), (area / 10.0) * (area / 10.0),
      (aspect / 10.0) * (aspect / 10.0), (10.0 * d) * (10.0 * d), (10.0 * d) * (10.0 * d),
      (10.0 * area) * (10.0 * area);
  t.cov = var.asDiagonal();
  t.last_box = box;
  t.last_frame = frame;
  t.appearance = feat;
  t.hits = 1;
  t.age = 0;
  return t;
}

Tracklet kalman_predict(const Tracklet& t, const KalmanParams& params) {
  Tracklet out = t;
  const Eigen::Matrix<double, 7, 7> f = transition();
  const double d = state_dim(t.state);
  const double area = std::max(t.state(2), kMinArea);
  const double aspect = std::max(t.state(3), kMinAspect);
  const double qp = params.process_rel * d;
  const double qa = params.process_rel * area;
  const double qr = params.process_rel * aspect;
  KState qd;
  qd << qp * qp, qp * qp, qa * qa, qr * qr, qp * qp, qp * qp, qa * qa;
  out.state = f * t.state;
  out.cov = f * t.cov * f.transpose() + KCov(qd.asDiagonal());
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

Tracklet kalman_update(const Tracklet& t, const Box& observed, const KalmanParams& params) {
  Tracklet out = t;
  Eigen::Matrix<double, 4, 7> h = Eigen::Matrix<double, 4, 7>::Zero();
  h(0, 0) = h(1, 1) = h(2, 2) = h(3, 3) = 1.0;

  const KState zs = box_to_state(observed);
  const Eigen::Vector4d z = zs.head<4>();
  const double d = 0.5 * (observed.width + observed.height);
  const double rp = params.obs_rel * d;
  const double ra = params.obs_rel * std::max(zs(2), kMinArea);
  const double rr = params.obs_rel * std::max(zs(3), kMinAspect);
  Eigen::Vector4d rd;
  rd << rp * rp, rp * rp, ra * ra, rr * rr;
  const Eigen::Matrix4d r = rd.asDiagonal();

  const Eigen::Matrix4d s = h * t.cov * h.transpose() + r;
  const Eigen::Matrix<double, 7, 4> k = t.cov * h.transpose() * s.llt().solve(Eigen::Matrix4d::Identity());
  out.state = t.state + k * (z - h * t.state);
  // Joseph form keeps the covariance PSD
  const KCov ikh = KCov::Identity() - k * h;
  out.cov = ikh * t.cov * ikh.transpose() + k * r * k.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  out.last_box = observed;
  return out;
}

}  // namespace motlab
