#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "motlab/box.hpp"
#include "motlab/rng.hpp"

namespace motlab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

enum class CameraView { surveillance, vehicle };
enum class Action { walk, run };

const char* to_string(CameraView v);
CameraView camera_view_from_string(const std::string& s);

// All controllable factors for one synthetic sequence. Fully determines the
// output together with the seed.
struct ScenarioConfig {
  int duration_frames = 300;
  double fps = 30.0;
  int width = 1024;
  int height = 768;
  CameraView camera_view = CameraView::surveillance;
  bool camera_moving = false;
  double camera_speed = 0.0;          // m/s, used when camera_moving
  std::vector<Vec2> camera_path;      // waypoints; empty = straight along yaw
  int target_density = 10;            // pedestrians inside the frustum
  double speed_mean = 1.0;            // m/s
  double speed_stddev = 0.3;          // m/s
  double run_fraction = 0.2;          // fraction of spawns that run (2x speed)
  std::uint64_t seed = 1;
};

// Throws std::invalid_argument naming the offending field.
void validate(const ScenarioConfig& cfg);

struct PedestrianState {
  int identity = 0;
  Vec2 position;           // ground plane, meters
  double heading = 0.0;    // radians
  double speed = 0.0;      // m/s
  Action action = Action::walk;
  double height = 1.7;     // m
  double half_width = 0.25;
  double half_depth = 0.15;
  std::vector<Vec2> waypoints;
  int appearance_id = 0;
  std::uint64_t rng_state = 0;  // private stream for waypoint draws
};

struct CameraModel {
  Vec3 position;          // meters, z up
  double pitch = 0.0;     // radians, negative looks down
  double yaw = 0.0;       // radians, 0 looks along +x
  double focal_px = 886.81;
  Vec2 principal{512.0, 384.0};
  int width = 1024;
  int height = 768;
};

struct GtBox {
  int frame = 0;
  int identity = 0;
  Box full_box;
  Box visible_box;
  double visibility = 0.0;
};

struct SequenceTruth {
  ScenarioConfig config;
  std::vector<std::vector<GtBox>> frames;
  std::map<int, std::vector<GtBox>> trajectories;
  // Logged 3D state per frame, for re-projection checks and oracles.
  std::vector<std::vector<PedestrianState>> states;
  std::vector<CameraModel> cameras;
};

// Camera presets: surveillance = 6 m high, pitch -35 deg, static;
// vehicle = 1.5 m high, pitch -5 deg, optionally moving.
CameraModel make_camera(const ScenarioConfig& cfg);

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;  // camera-frame z, > 0 in front
};

// Pinhole projection. nullopt = behind camera (depth <= 0), a value not a failure.
std::optional<Projection> project_point(const CameraModel& cam, const Vec3& p);

// Raw projected extent of the pedestrian's upright 3D box plus the camera
// depth of its center, before clipping. nullopt when any corner is behind
// the camera (the extent is unbounded there).
struct Extent {
  Box box;
  double depth = 0.0;
};
std::optional<Extent> projected_extent(const CameraModel& cam, const PedestrianState& ped);

// Full-body box clipped to the image; nullopt when behind camera or the
// clipped box is empty.
std::optional<Box> full_body_box(const CameraModel& cam, const PedestrianState& ped);

// Sampled occlusion test over the clipped full box; a cell is visible iff no
// other pedestrian covers it at strictly smaller depth. Returns the tight
// bounds of visible cells and the visible fraction.
struct VisibleResult {
  Box box;
  double visibility = 0.0;
};
VisibleResult visible_box(const CameraModel& cam, const PedestrianState& ped,
                          const std::vector<PedestrianState>& others, double stride = 2.0);

struct Arena {
  Vec2 lo;
  Vec2 hi;
};

// 40 m x 40 m square centered on the camera's look-at ground point.
Arena arena_for(const CameraModel& cam);

bool in_frustum(const CameraModel& cam, const PedestrianState& ped);

// One waypoint-following step: re-aims at the current waypoint (consuming it
// when closer than 0.2 m, drawing a fresh one from the state's own stream
// when the list runs out) and advances exactly speed*dt along the heading.
PedestrianState step_pedestrian(const PedestrianState& state, double dt, const Arena& arena);

// Mutable world used by the generator; exposed so density maintenance can be
// tested on its own.
struct World {
  std::vector<PedestrianState> pedestrians;
  std::map<int, int> frames_outside;  // identity -> consecutive frames out of frustum
  int next_identity = 1;
  Rng rng;
  ScenarioConfig config;

  explicit World(const ScenarioConfig& cfg)
      : rng(derive_seed(cfg.seed, 0x77a0)), config(cfg) {}
};

struct DensityActions {
  std::vector<int> spawned;
  std::vector<int> despawned;
};

// Despawns pedestrians that have been out of the frustum for more than 30
// frames and spawns fresh identities at random in-frustum positions until the
// in-frustum count reaches the target.
DensityActions maintain_density(World& world, const CameraModel& cam, int target);

SequenceTruth generate_scenario(const ScenarioConfig& cfg);

}  // namespace motlab
