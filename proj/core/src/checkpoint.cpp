#include "cfharm/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "cfharm/trainer.hpp"

namespace cfharm {

namespace {

constexpr char kMagic[8] = {'C', 'F', 'H', 'A', 'R', 'M', 'C', 'K'};

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  template <typename T>
  void pod(T v) {
    os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void ints(const std::vector<int>& v) {
    pod<std::uint64_t>(v.size());
    for (int x : v) pod<std::int32_t>(x);
  }
  void vec(const Vector& v) {
    pod<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
    os_.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  Reader(std::istream& is, const std::string& path) : is_(is), path_(path) {}
  template <typename T>
  T pod() {
    T v{};
    is_.read(reinterpret_cast<char*>(&v), sizeof(T));
    check();
    return v;
  }
  std::string str() {
    const auto n = bounded(pod<std::uint64_t>());
    std::string s(n, '\0');
    is_.read(s.data(), static_cast<std::streamsize>(n));
    check();
    return s;
  }
  std::vector<int> ints() {
    const auto n = bounded(pod<std::uint64_t>());
    std::vector<int> v(n);
    for (auto& x : v) x = pod<std::int32_t>();
    return v;
  }
  Vector vec() {
    const auto n = bounded(pod<std::uint64_t>());
    Vector v(static_cast<Eigen::Index>(n));
    is_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    check();
    return v;
  }

 private:
  std::size_t bounded(std::uint64_t n) {
    if (n > (std::uint64_t{1} << 32)) throw std::runtime_error(path_ + ": corrupt checkpoint");
    return static_cast<std::size_t>(n);
  }
  void check() {
    if (!is_) throw std::runtime_error(path_ + ": truncated checkpoint");
  }
  std::istream& is_;
  const std::string& path_;
};

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

bool Checkpoint::operator==(const Checkpoint& o) const {
  return env == o.env && grid_path == o.grid_path && formulation == o.formulation &&
         spec == o.spec && same_bits(params, o.params) && adam.lr == o.adam.lr &&
         adam.beta1 == o.adam.beta1 && adam.beta2 == o.adam.beta2 &&
         adam.eps == o.adam.eps && same_bits(adam_m, o.adam_m) &&
         same_bits(adam_v, o.adam_v) && adam_t == o.adam_t &&
         std::memcmp(&multiplier, &o.multiplier, sizeof(double)) == 0 &&
         std::memcmp(&threshold, &o.threshold, sizeof(double)) == 0 &&
         update == o.update && rng_state == o.rng_state;
}

Checkpoint make_checkpoint(const Trainer& t) {
  Checkpoint ck;
  ck.env = t.config().env;
  ck.grid_path = t.config().grid_path;
  ck.formulation = t.config().formulation;
  ck.spec = t.model().spec();
  ck.params = t.model().params();
  ck.adam = t.optimizer().config();
  ck.adam_m = t.optimizer().first_moment();
  ck.adam_v = t.optimizer().second_moment();
  ck.adam_t = t.optimizer().steps();
  ck.multiplier = t.multiplier();
  ck.threshold = t.threshold();
  ck.update = t.updates_done();
  std::ostringstream os;
  os << t.policy_rng();
  ck.rng_state = os.str();
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path);
  os.write(kMagic, sizeof(kMagic));
  Writer w(os);
  w.pod<std::uint32_t>(Checkpoint::kVersion);
  w.str(ck.env);
  w.str(ck.grid_path);
  w.str(ck.formulation);
  const ModelSpec& s = ck.spec;
  w.pod<std::int32_t>(s.obs_dim);
  w.pod<std::int32_t>(s.action_dim);
  w.ints(s.hidden);
  w.pod<std::int32_t>(s.state_features);
  w.ints(s.encoder_hidden);
  w.pod<std::uint8_t>(s.constraint_sigmoid ? 1 : 0);
  w.pod(s.log_std_init);
  w.pod(s.log_std_min);
  w.pod(s.log_std_max);
  w.pod(s.actor_output_scale);
  w.vec(ck.params);
  w.pod(ck.adam.lr);
  w.pod(ck.adam.beta1);
  w.pod(ck.adam.beta2);
  w.pod(ck.adam.eps);
  w.vec(ck.adam_m);
  w.vec(ck.adam_v);
  w.pod<std::int64_t>(ck.adam_t);
  w.pod(ck.multiplier);
  w.pod(ck.threshold);
  w.pod<std::int64_t>(ck.update);
  w.str(ck.rng_state);
  if (!os) throw std::runtime_error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path);
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path + ": not a checkpoint file");
  }
  Reader r(is, path);
  const auto version = r.pod<std::uint32_t>();
  if (version != Checkpoint::kVersion) {
    throw std::runtime_error(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.env = r.str();
  ck.grid_path = r.str();
  ck.formulation = r.str();
  ModelSpec& s = ck.spec;
  s.obs_dim = r.pod<std::int32_t>();
  s.action_dim = r.pod<std::int32_t>();
  s.hidden = r.ints();
  s.state_features = r.pod<std::int32_t>();
  s.encoder_hidden = r.ints();
  s.constraint_sigmoid = r.pod<std::uint8_t>() != 0;
  s.log_std_init = r.pod<double>();
  s.log_std_min = r.pod<double>();
  s.log_std_max = r.pod<double>();
  s.actor_output_scale = r.pod<double>();
  ck.params = r.vec();
  ck.adam.lr = r.pod<double>();
  ck.adam.beta1 = r.pod<double>();
  ck.adam.beta2 = r.pod<double>();
  ck.adam.eps = r.pod<double>();
  ck.adam_m = r.vec();
  ck.adam_v = r.vec();
  ck.adam_t = r.pod<std::int64_t>();
  ck.multiplier = r.pod<double>();
  ck.threshold = r.pod<double>();
  ck.update = r.pod<std::int64_t>();
  ck.rng_state = r.str();
  return ck;
}

ActorCritic restore_model(const Checkpoint& ck) {
  ActorCritic model(ck.spec);
  if (model.params().size() != ck.params.size()) {
    throw std::runtime_error("checkpoint parameter count does not match its model spec");
  }
  model.params() = ck.params;
  return model;
}

}  // namespace cfharm
