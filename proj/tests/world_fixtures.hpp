#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vsr/sim_world.hpp"

namespace fixtures {

// One video of 800 frames (8 segments of 100) with a local question whose
// key event is in segment `key_segment`, and a global question whose key
// events are in segments 1 and 6.
inline vsr::sim::World small_world(int key_segment = 5, vsr::sim::SimPolicy policy = {}) {
  using namespace vsr::sim;
  World w;
  w.seed = 99;
  w.policy = policy;
  SimVideo v;
  v.meta = {"v1", 800, 30.0};
  const std::int64_t lo = key_segment * 100 + 40;
  v.events = {{"evt_local", lo, lo + 30}, {"evt_g1", 120, 160}, {"evt_g2", 630, 680}, {"bg_noise", 300, 310}};
  w.videos.push_back(v);

  SimQuestion local;
  local.id = "qa";
  local.video_id = "v1";
  local.question = "What is the person doing at the key moment?";
  local.options = {"cooking", "cleaning", "reading", "running"};
  local.truth = vsr::OptionLabel(2);
  local.category = vsr::DeclaredType::Local;
  local.key_events = {"evt_local"};
  w.questions.push_back(local);

  SimQuestion global;
  global.id = "qb";
  global.video_id = "v1";
  global.question = "How many times does the activity happen over the whole video?";
  global.options = {"one", "two", "three", "four"};
  global.truth = vsr::OptionLabel(1);
  global.category = vsr::DeclaredType::Global;
  global.key_events = {"evt_g1", "evt_g2"};
  w.questions.push_back(global);

  w.finalize();
  return w;
}

inline std::shared_ptr<const vsr::sim::World> shared(vsr::sim::World w) {
  return std::make_shared<const vsr::sim::World>(std::move(w));
}

}  // namespace fixtures
