#include "adamlab/sampling.hpp"

#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace adamlab {

std::string_view sampling_name(SamplingKind kind) {
  switch (kind) {
    case SamplingKind::WithReplacement: return "wr";
    case SamplingKind::RandomShuffle: return "rr";
    case SamplingKind::Cyclic: return "cyclic";
  }
  return "?";
}

SamplingKind parse_sampling(std::string_view name) {
  if (name == "wr" || name == "with-replacement") return SamplingKind::WithReplacement;
  if (name == "rr" || name == "shuffle" || name == "random-shuffle") return SamplingKind::RandomShuffle;
  if (name == "cyclic") return SamplingKind::Cyclic;
  throw std::invalid_argument("unknown sampling scheme '" + std::string(name) + "'");
}

IndexSampler::IndexSampler(SamplingScheme scheme, std::size_t n)
    : scheme_(scheme), n_(n), rng_(scheme.seed), perm_(n), pos_(n) {
  if (n == 0) throw std::invalid_argument("IndexSampler: n must be >= 1");
}

void IndexSampler::reshuffle() {
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  for (std::size_t i = n_; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng_.bounded(i));
    std::swap(perm_[i - 1], perm_[j]);
  }
  pos_ = 0;
}

void IndexSampler::begin_epoch() {
  switch (scheme_.kind) {
    case SamplingKind::RandomShuffle: reshuffle(); break;
    case SamplingKind::Cyclic: calls_ += (n_ - calls_ % n_) % n_; break;
    case SamplingKind::WithReplacement: break;
  }
}

std::size_t IndexSampler::next() {
  std::size_t idx = 0;
  switch (scheme_.kind) {
    case SamplingKind::WithReplacement:
      idx = static_cast<std::size_t>(rng_.bounded(n_));
      break;
    case SamplingKind::RandomShuffle:
      if (pos_ >= n_) reshuffle();
      idx = perm_[pos_++];
      break;
    case SamplingKind::Cyclic:
      idx = static_cast<std::size_t>(calls_ % n_);
      break;
  }
  ++calls_;
  return idx;
}

}  // namespace adamlab
