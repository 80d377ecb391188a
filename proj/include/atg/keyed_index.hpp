#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <type_traits>
#include <vector>

#include "atg/value.hpp"

namespace atg {

// Ordered map from fixed-arity value tuples to an append-only list of
// payloads. Keys live in one flat arena; the tree (a red-black std::map, so
// O(log n) worst-case search and insert) only holds arena offsets. Payload
// lists are chained through a second arena and iterate oldest first.
template <class Payload>
class KeyedIndex {
 public:
  explicit KeyedIndex(std::size_t arity)
      : arity_(arity),
        keys_(std::make_unique<std::vector<Value>>()),
        tree_(Less{keys_.get(), arity}) {}

  std::size_t arity() const { return arity_; }
  std::size_t key_count() const { return tree_.size(); }
  std::size_t entry_count() const { return nodes_.size(); }
  bool empty() const { return tree_.empty(); }

  void insert(std::span<const Value> key, const Payload& p) {
    const auto node = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({p, kNone});
    auto it = tree_.find(key);
    if (it == tree_.end()) {
      const auto offset = static_cast<std::uint32_t>(keys_->size());
      keys_->insert(keys_->end(), key.begin(), key.end());
      tree_.emplace(offset, Chain{node, node});
      return;
    }
    nodes_[it->second.tail].next = node;
    it->second.tail = node;
  }

  bool contains(std::span<const Value> key) const { return tree_.find(key) != tree_.end(); }

  // Pointer to the oldest payload under key, or nullptr.
  const Payload* first(std::span<const Value> key) const {
    auto it = tree_.find(key);
    if (it == tree_.end()) return nullptr;
    return &nodes_[it->second.head].payload;
  }

  // Calls f(payload) for each payload under key, oldest first. Stops early if
  // f returns false (when f returns bool).
  template <class F>
  void for_each(std::span<const Value> key, F&& f) const {
    auto it = tree_.find(key);
    if (it == tree_.end()) return;
    for (std::uint32_t n = it->second.head; n != kNone; n = nodes_[n].next) {
      if constexpr (std::is_same_v<decltype(f(nodes_[n].payload)), bool>) {
        if (!f(nodes_[n].payload)) return;
      } else {
        f(nodes_[n].payload);
      }
    }
  }

 private:
  static constexpr std::uint32_t kNone = ~std::uint32_t{0};

  struct Node {
    Payload payload;
    std::uint32_t next;
  };
  struct Chain {
    std::uint32_t head;
    std::uint32_t tail;
  };

  struct Less {
    using is_transparent = void;
    const std::vector<Value>* keys;
    std::size_t arity;

    std::span<const Value> at(std::uint32_t off) const { return {keys->data() + off, arity}; }
    static bool lt(std::span<const Value> a, std::span<const Value> b) {
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
    bool operator()(std::uint32_t a, std::uint32_t b) const { return lt(at(a), at(b)); }
    bool operator()(std::span<const Value> a, std::uint32_t b) const { return lt(a, at(b)); }
    bool operator()(std::uint32_t a, std::span<const Value> b) const { return lt(at(a), b); }
  };

  std::size_t arity_;
  std::unique_ptr<std::vector<Value>> keys_;
  std::map<std::uint32_t, Chain, Less> tree_;
  std::vector<Node> nodes_;
};

}  // namespace atg
