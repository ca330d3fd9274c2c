#include "motlab/sim.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace motlab {

namespace {

constexpr double kWaypointReach = 0.2;   // m
constexpr double kArenaHalf = 20.0;      // m
constexpr int kDespawnGrace = 30;        // frames out of frustum before despawn
constexpr int kSpawnAttempts = 200;

struct CameraBasis {
  Vec3 right, down, forward;
};

CameraBasis basis_of(const CameraModel& cam) {
  const double cy = std::cos(cam.yaw), sy = std::sin(cam.yaw);
  const double cp = std::cos(cam.pitch), sp = std::sin(cam.pitch);
  CameraBasis b;
  b.forward = {cy * cp, sy * cp, sp};
  b.right = {sy, -cy, 0.0};
  // forward x right: image-down direction in world coordinates
  b.down = {b.forward.y * b.right.z - b.forward.z * b.right.y,
            b.forward.z * b.right.x - b.forward.x * b.right.z,
            b.forward.x * b.right.y - b.forward.y * b.right.x};
  return b;
}

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

Vec2 local_axis(double heading) { return {std::cos(heading), std::sin(heading)}; }

// 8 corners of the upright box, footprint oriented by heading.
std::array<Vec3, 8> body_corners(const PedestrianState& p) {
  const Vec2 fwd = local_axis(p.heading);
  const Vec2 left{-fwd.y, fwd.x};
  std::array<Vec3, 8> out;
  int k = 0;
  for (double df : {-p.half_depth, p.half_depth})
    for (double dl : {-p.half_width, p.half_width})
      for (double z : {0.0, p.height})
        out[k++] = {p.position.x + df * fwd.x + dl * left.x,
                    p.position.y + df * fwd.y + dl * left.y, z};
  return out;
}

Vec3 body_center(const PedestrianState& p) {
  return {p.position.x, p.position.y, 0.5 * p.height};
}

Vec2 draw_waypoint(std::uint64_t& rng_state, const Arena& arena) {
  Rng r(rng_state);
  const Vec2 wp{r.uniform(arena.lo.x, arena.hi.x), r.uniform(arena.lo.y, arena.hi.y)};
  rng_state = derive_seed(rng_state, 0x57a9);
  return wp;
}

}  // namespace

const char* to_string(CameraView v) {
  return v == CameraView::surveillance ? "surveillance" : "vehicle";
}

CameraView camera_view_from_string(const std::string& s) {
  if (s == "surveillance") return CameraView::surveillance;
  if (s == "vehicle") return CameraView::vehicle;
  throw std::invalid_argument("camera_view: expected 'surveillance' or 'vehicle', got '" + s + "'");
}

void validate(const ScenarioConfig& cfg) {
  if (cfg.duration_frames < 1) throw std::invalid_argument("duration_frames: must be >= 1");
  if (!(cfg.fps > 0.0)) throw std::invalid_argument("fps: must be > 0");
  if (cfg.width <= 0) throw std::invalid_argument("resolution.width: must be > 0");
  if (cfg.height <= 0) throw std::invalid_argument("resolution.height: must be > 0");
  if (cfg.target_density < 0) throw std::invalid_argument("target_density: must be >= 0");
  if (!(cfg.speed_mean > 0.0)) throw std::invalid_argument("speed_mean: must be > 0");
  if (cfg.speed_stddev < 0.0) throw std::invalid_argument("speed_stddev: must be >= 0");
  if (cfg.run_fraction < 0.0 || cfg.run_fraction > 1.0)
    throw std::invalid_argument("run_fraction: must be in [0,1]");
  if (cfg.camera_moving && !(cfg.camera_speed > 0.0))
    throw std::invalid_argument("camera_speed: must be > 0 when camera_moving");
}

CameraModel make_camera(const ScenarioConfig& cfg) {
  CameraModel cam;
  cam.width = cfg.width;
  cam.height = cfg.height;
  cam.principal = {cfg.width / 2.0, cfg.height / 2.0};
  // 60 degree horizontal field of view
  cam.focal_px = (cfg.width / 2.0) / std::tan(M_PI / 6.0);
  if (cfg.camera_view == CameraView::surveillance) {
    cam.position = {0.0, 0.0, 6.0};
    cam.pitch = -35.0 * M_PI / 180.0;
  } else {
    cam.position = {0.0, 0.0, 1.5};
    cam.pitch = -5.0 * M_PI / 180.0;
  }
  cam.yaw = 0.0;
  return cam;
}

std::optional<Projection> project_point(const CameraModel& cam, const Vec3& p) {
  const CameraBasis b = basis_of(cam);
  const Vec3 d{p.x - cam.position.x, p.y - cam.position.y, p.z - cam.position.z};
  const double depth = dot(d, b.forward);
  if (depth <= 0.0) return std::nullopt;
  const double xc = dot(d, b.right);
  const double yc = dot(d, b.down);
  return Projection{cam.principal.x + cam.focal_px * xc / depth,
                    cam.principal.y + cam.focal_px * yc / depth, depth};
}

std::optional<Extent> projected_extent(const CameraModel& cam, const PedestrianState& ped) {
  double lo_u = 1e18, hi_u = -1e18, lo_v = 1e18, hi_v = -1e18;
  for (const Vec3& c : body_corners(ped)) {
    const auto pr = project_point(cam, c);
    if (!pr) return std::nullopt;
    lo_u = std::min(lo_u, pr->u);
    hi_u = std::max(hi_u, pr->u);
    lo_v = std::min(lo_v, pr->v);
    hi_v = std::max(hi_v, pr->v);
  }
  const auto center = project_point(cam, body_center(ped));
  if (!center) return std::nullopt;
  return Extent{Box{lo_u, lo_v, hi_u - lo_u, hi_v - lo_v}, center->depth};
}

std::optional<Box> full_body_box(const CameraModel& cam, const PedestrianState& ped) {
  const auto ext = projected_extent(cam, ped);
  if (!ext) return std::nullopt;
  const Box clipped = clip_to_image(ext->box, cam.width, cam.height);
  if (clipped.empty()) return std::nullopt;
  return clipped;
}

VisibleResult visible_box(const CameraModel& cam, const PedestrianState& ped,
                          const std::vector<PedestrianState>& others, double stride) {
  const auto ext = projected_extent(cam, ped);
  VisibleResult res;
  if (!ext) return res;
  const Box full = clip_to_image(ext->box, cam.width, cam.height);
  if (full.empty()) return res;

  // occluders: anything strictly closer whose raw extent overlaps
  std::vector<Extent> occluders;
  for (const auto& o : others) {
    if (o.identity == ped.identity) continue;
    const auto oe = projected_extent(cam, o);
    if (!oe) continue;
    if (oe->depth < ext->depth && !intersect(oe->box, full).empty())
      occluders.push_back(*oe);
  }

  const int nx = std::max(1, static_cast<int>(std::ceil(full.width / stride)));
  const int ny = std::max(1, static_cast<int>(std::ceil(full.height / stride)));
  const double dx = full.width / nx;
  const double dy = full.height / ny;

  int visible = 0;
  int min_i = nx, max_i = -1, min_j = ny, max_j = -1;
  for (int j = 0; j < ny; ++j) {
    const double v = full.top + (j + 0.5) * dy;
    for (int i = 0; i < nx; ++i) {
      const double u = full.left + (i + 0.5) * dx;
      bool covered = false;
      for (const auto& oc : occluders) {
        if (oc.box.contains(u, v)) {
          covered = true;
          break;
        }
      }
      if (!covered) {
        ++visible;
        min_i = std::min(min_i, i);
        max_i = std::max(max_i, i);
        min_j = std::min(min_j, j);
        max_j = std::max(max_j, j);
      }
    }
  }
  res.visibility = static_cast<double>(visible) / (static_cast<double>(nx) * ny);
  if (visible > 0) {
    res.box = Box{full.left + min_i * dx, full.top + min_j * dy,
                  (max_i - min_i + 1) * dx, (max_j - min_j + 1) * dy};
    res.box = intersect(res.box, full);
  }
  return res;
}

Arena arena_for(const CameraModel& cam) {
  const CameraBasis b = basis_of(cam);
  // ground point along the optical axis, capped for near-horizontal cameras
  double t = 20.0;
  if (b.forward.z < -1e-9) t = std::min(40.0, -cam.position.z / b.forward.z);
  const Vec2 look{cam.position.x + t * b.forward.x, cam.position.y + t * b.forward.y};
  return Arena{{look.x - kArenaHalf, look.y - kArenaHalf},
               {look.x + kArenaHalf, look.y + kArenaHalf}};
}

bool in_frustum(const CameraModel& cam, const PedestrianState& ped) {
  const auto pr = project_point(cam, body_center(ped));
  if (!pr) return false;
  return pr->u >= 0.0 && pr->u < cam.width && pr->v >= 0.0 && pr->v < cam.height;
}

PedestrianState step_pedestrian(const PedestrianState& state, double dt, const Arena& arena) {
  PedestrianState s = state;
  if (s.waypoints.empty()) s.waypoints.push_back(draw_waypoint(s.rng_state, arena));
  // consume reached waypoints before moving
  for (int guard = 0; guard < 16; ++guard) {
    const Vec2& wp = s.waypoints.front();
    const double d = std::hypot(wp.x - s.position.x, wp.y - s.position.y);
    if (d > kWaypointReach) break;
    s.waypoints.erase(s.waypoints.begin());
    if (s.waypoints.empty()) s.waypoints.push_back(draw_waypoint(s.rng_state, arena));
  }
  const Vec2& wp = s.waypoints.front();
  s.heading = std::atan2(wp.y - s.position.y, wp.x - s.position.x);
  s.position.x += s.speed * dt * std::cos(s.heading);
  s.position.y += s.speed * dt * std::sin(s.heading);
  return s;
}

namespace {

PedestrianState spawn_pedestrian(World& w, const CameraModel& cam, const Arena& arena) {
  PedestrianState p;
  p.identity = w.next_identity++;
  p.appearance_id = p.identity;
  p.rng_state = derive_seed(w.config.seed, 0x9ed, static_cast<std::uint64_t>(p.identity));
  p.height = std::clamp(w.rng.normal(1.7, 0.07), 1.4, 2.0);
  p.half_width = 0.25;
  p.half_depth = 0.15;
  double walk = w.rng.normal(w.config.speed_mean, w.config.speed_stddev);
  walk = std::max(walk, 0.05 * w.config.speed_mean);
  p.action = w.rng.uniform() < w.config.run_fraction ? Action::run : Action::walk;
  p.speed = p.action == Action::run ? 2.0 * walk : walk;

  for (int attempt = 0; attempt < kSpawnAttempts; ++attempt) {
    p.position = {w.rng.uniform(arena.lo.x, arena.hi.x), w.rng.uniform(arena.lo.y, arena.hi.y)};
    if (in_frustum(cam, p)) break;
  }
  p.waypoints.push_back(draw_waypoint(p.rng_state, arena));
  p.heading = std::atan2(p.waypoints.front().y - p.position.y,
                         p.waypoints.front().x - p.position.x);
  return p;
}

}  // namespace

DensityActions maintain_density(World& world, const CameraModel& cam, int target) {
  DensityActions actions;
  const Arena arena = arena_for(cam);

  int inside = 0;
  for (auto& p : world.pedestrians) {
    if (in_frustum(cam, p)) {
      world.frames_outside[p.identity] = 0;
      ++inside;
    } else {
      ++world.frames_outside[p.identity];
    }
  }
  std::erase_if(world.pedestrians, [&](const PedestrianState& p) {
    if (world.frames_outside[p.identity] > kDespawnGrace) {
      actions.despawned.push_back(p.identity);
      world.frames_outside.erase(p.identity);
      return true;
    }
    return false;
  });
  for (int k = inside; k < target; ++k) {
    PedestrianState p = spawn_pedestrian(world, cam, arena);
    actions.spawned.push_back(p.identity);
    world.frames_outside[p.identity] = 0;
    world.pedestrians.push_back(std::move(p));
  }
  return actions;
}

SequenceTruth generate_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  SequenceTruth truth;
  truth.config = cfg;
  truth.frames.resize(cfg.duration_frames);
  truth.states.resize(cfg.duration_frames);
  truth.cameras.reserve(cfg.duration_frames);

  CameraModel cam = make_camera(cfg);
  World world(cfg);
  const double dt = 1.0 / cfg.fps;
  std::vector<Vec2> cam_path = cfg.camera_path;

  for (int f = 0; f < cfg.duration_frames; ++f) {
    if (f > 0) {
      if (cfg.camera_moving) {
        double step = cfg.camera_speed * dt;
        while (step > 0.0 && !cam_path.empty()) {
          const Vec2& wp = cam_path.front();
          const double d = std::hypot(wp.x - cam.position.x, wp.y - cam.position.y);
          if (d <= step) {
            cam.yaw = std::atan2(wp.y - cam.position.y, wp.x - cam.position.x);
            cam.position.x = wp.x;
            cam.position.y = wp.y;
            step -= d;
            cam_path.erase(cam_path.begin());
          } else {
            cam.yaw = std::atan2(wp.y - cam.position.y, wp.x - cam.position.x);
            cam.position.x += step * std::cos(cam.yaw);
            cam.position.y += step * std::sin(cam.yaw);
            step = 0.0;
          }
        }
        if (step > 0.0) {  // straight continuation along yaw
          cam.position.x += step * std::cos(cam.yaw);
          cam.position.y += step * std::sin(cam.yaw);
        }
      }
      const Arena arena = arena_for(cam);
      for (auto& p : world.pedestrians) p = step_pedestrian(p, dt, arena);
    }
    maintain_density(world, cam, cfg.target_density);

    auto& frame_boxes = truth.frames[f];
    for (const auto& p : world.pedestrians) {
      const auto full = full_body_box(cam, p);
      if (!full) continue;
      const VisibleResult vis = visible_box(cam, p, world.pedestrians);
      GtBox gt;
      gt.frame = f;
      gt.identity = p.identity;
      gt.full_box = *full;
      gt.visible_box = vis.box;
      gt.visibility = vis.visibility;
      frame_boxes.push_back(gt);
      truth.trajectories[p.identity].push_back(gt);
    }
    truth.states[f] = world.pedestrians;
    truth.cameras.push_back(cam);
  }
  return truth;
}

}  // namespace motlab
