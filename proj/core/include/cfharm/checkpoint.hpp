#ifndef CFHARM_CHECKPOINT_HPP_
#define CFHARM_CHECKPOINT_HPP_

#include <string>

#include "cfharm/model.hpp"
#include "cfharm/nn.hpp"

namespace cfharm {

class Trainer;

// Everything needed to rebuild a trained policy and continue its optimizer.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string env;
  std::string grid_path;
  std::string formulation;
  ModelSpec spec;
  Vector params;
  AdamConfig adam;
  Vector adam_m;
  Vector adam_v;
  long adam_t = 0;
  double multiplier = 0.0;
  double threshold = 0.0;
  long update = 0;
  std::string rng_state;  // policy sampling stream, text form

  bool operator==(const Checkpoint& o) const;
};

Checkpoint make_checkpoint(const Trainer& trainer);

// Binary, versioned; read(write(c)) == c bit for bit. Errors throw
// std::runtime_error naming the file.
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// Model with the checkpoint's parameters.
ActorCritic restore_model(const Checkpoint& ck);

}  // namespace cfharm

#endif  // CFHARM_CHECKPOINT_HPP_
