#include "nmps/replay.hpp"

#include <stdexcept>

namespace nmps {

ReplayBuffers::ReplayBuffers(const ReplayConfig& cfg) : cfg_(cfg) {
  if (cfg.capacity < cfg.batch_size)
    throw std::invalid_argument("ReplayBuffers: capacity must be >= batch_size");
  if (cfg.batch_size == 0)
    throw std::invalid_argument("ReplayBuffers: batch_size must be positive");
}

const std::deque<Transition>& ReplayBuffers::ring(BufferId id) const {
  return id == BufferId::Exploit ? exploit_ : explor_;
}

std::deque<Transition>& ReplayBuffers::ring(BufferId id) {
  return id == BufferId::Exploit ? exploit_ : explor_;
}

void ReplayBuffers::push(const Transition& tr) {
  BufferId target;
  switch (cfg_.sharing) {
    case Sharing::Separate:
      target = tr.actor == Actor::Exploit ? BufferId::Exploit : BufferId::Explor;
      break;
    case Sharing::ExploitCommon:
      target = BufferId::Exploit;  // single shared store
      break;
    case Sharing::ExplorCommon:
      target = BufferId::Explor;
      break;
    default:
      throw std::logic_error("ReplayBuffers::push: bad sharing mode");
  }
  auto& buf = ring(target);
  buf.push_back(tr);
  if (buf.size() > cfg_.capacity) buf.pop_front();
}

BufferId ReplayBuffers::source_for(Actor role) const {
  switch (cfg_.sharing) {
    case Sharing::Separate:
      return role == Actor::Exploit ? BufferId::Exploit : BufferId::Explor;
    case Sharing::ExploitCommon:
      return BufferId::Exploit;
    case Sharing::ExplorCommon:
      return BufferId::Explor;
  }
  throw std::logic_error("ReplayBuffers::source_for: bad sharing mode");
}

bool ReplayBuffers::ready_for(Actor role) const {
  return ring(source_for(role)).size() >= cfg_.batch_size;
}

std::optional<Batch> ReplayBuffers::sample_for(Actor role, Rng& rng) const {
  const BufferId src = source_for(role);
  const auto& buf = ring(src);
  if (buf.size() < cfg_.batch_size) return std::nullopt;
  Batch batch;
  batch.source = src;
  batch.items.reserve(cfg_.batch_size);
  batch.provenance.reserve(cfg_.batch_size);
  for (size_t i = 0; i < cfg_.batch_size; ++i) {
    const size_t idx = static_cast<size_t>(rng.uniform_int(buf.size()));
    batch.items.push_back(buf[idx]);
    batch.provenance.push_back(src);
  }
  return batch;
}

size_t ReplayBuffers::size(BufferId id) const { return ring(id).size(); }

const std::deque<Transition>& ReplayBuffers::storage(BufferId id) const {
  return ring(id);
}

}  // namespace nmps
