#include "mub6/set_bundle.hpp"

#include <filesystem>

namespace mub6 {

namespace fs = std::filesystem;

void SetBundle::check_consistent() const {
  params.validate();
  const std::pair<const VectorSet*, SetKind> expected[] = {
      {&ort_mon, SetKind::OrtMon}, {&ort, SetKind::Ort}, {&ort_eps, SetKind::OrtEps},
      {&ub_mon, SetKind::UbMon},   {&ub, SetKind::Ub},   {&ub_eps, SetKind::UbEps},
  };
  for (auto [set, kind] : expected) {
    if (set->empty() && set->n() == 0) continue;
    if (set->kind() != kind) {
      throw ParamMismatch("expected a " + std::string(to_string(kind)) + " set, got " + std::string(to_string(set->kind())));
    }
    if (set->params() != params) {
      throw ParamMismatch(std::string(to_string(kind)) + " set has n=" + std::to_string(set->n()) + " depth=" +
                        std::to_string(set->depth()) + ", expected n=" + std::to_string(params.n) +
                        " depth=" + std::to_string(params.depth));
    }
  }
}

SetBundle SetBundle::generate(const DiscParams& params, bool orthogonal, bool unbiased, int threads) {
  params.validate();
  SetBundle b;
  b.params = params;
  if (orthogonal) {
    b.ort_mon = gen_mon(FeasKind::Orthogonal, params, threads);
    b.ort = expand_permutations(b.ort_mon);
    b.ort_eps = expand_eps(b.ort);
  }
  if (unbiased) {
    b.ub_mon = gen_mon(FeasKind::Unbiased, params, threads);
    b.ub = expand_permutations(b.ub_mon);
    b.ub_eps = expand_eps(b.ub);
  }
  return b;
}

SetBundle SetBundle::load(const std::string& dir, const DiscParams& params, bool orthogonal, bool unbiased) {
  SetBundle b;
  b.params = params;
  auto load_one = [&](SetKind kind, VectorSet& slot) {
    const fs::path path = fs::path(dir) / set_file_name(kind, params);
    if (!fs::exists(path)) throw ConfigError("missing set file " + path.string());
    slot = read_set(path.string());
  };
  if (orthogonal) {
    load_one(SetKind::OrtMon, b.ort_mon);
    load_one(SetKind::Ort, b.ort);
    load_one(SetKind::OrtEps, b.ort_eps);
  }
  if (unbiased) {
    load_one(SetKind::UbMon, b.ub_mon);
    load_one(SetKind::Ub, b.ub);
    load_one(SetKind::UbEps, b.ub_eps);
  }
  b.check_consistent();
  return b;
}

void SetBundle::save(const std::string& dir) const {
  fs::create_directories(dir);
  for (const VectorSet* set : {&ort_mon, &ort, &ort_eps, &ub_mon, &ub, &ub_eps}) {
    if (set->n() == 0) continue;
    write_set((fs::path(dir) / set_file_name(set->kind(), params)).string(), *set);
  }
}

}  // namespace mub6
