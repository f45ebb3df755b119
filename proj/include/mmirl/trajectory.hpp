#ifndef MMIRL_TRAJECTORY_HPP_
#define MMIRL_TRAJECTORY_HPP_

#include <optional>
#include <string>
#include <vector>

namespace mmirl {

/// Time-ordered (state, action) pairs; the unit of demonstration data.
/// This stripped type is the only trajectory type the IRL trainer accepts —
/// it has no field that could carry a mode label or a reward.
struct Trajectory {
  std::vector<std::vector<double>> states;   // length x state_dim, raw observations
  std::vector<std::vector<double>> actions;  // length x action_dim

  std::size_t length() const { return states.size(); }
};

/// Evaluation-only annotations, withheld from the training load path.
struct Sidecar {
  int mode_label = 0;
  std::vector<double> rewards;
  std::string expert_kind;
};

struct TrajectoryRecord {
  int schema_version = 1;
  std::string env_id;
  Trajectory traj;
  std::optional<Sidecar> sidecar;
};

using DemoDataset = std::vector<TrajectoryRecord>;

}  // namespace mmirl

#endif  // MMIRL_TRAJECTORY_HPP_
