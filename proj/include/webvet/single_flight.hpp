#pragma once

#include <future>
#include <map>
#include <mutex>
#include <utility>

namespace webvet {

/// Run-scoped memo where concurrent requests for one key coalesce into a
/// single computation; every waiter receives the same value or exception.
template <typename Key, typename Value>
class SingleFlight {
 public:
  template <typename Fn>
  Value get(const Key& key, Fn&& compute) {
    std::promise<Value> promise;
    std::shared_future<Value> future;
    bool owner = false;
    {
      std::lock_guard lock(mu_);
      auto it = entries_.find(key);
      if (it == entries_.end()) {
        future = promise.get_future().share();
        entries_.emplace(key, future);
        owner = true;
      } else {
        future = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(std::forward<Fn>(compute)());
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return future.get();
  }

  bool contains(const Key& key) const {
    std::lock_guard lock(mu_);
    return entries_.count(key) != 0;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

 private:
  mutable std::mutex mu_;
  std::map<Key, std::shared_future<Value>> entries_;
};

}  // namespace webvet
