#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tablatex/nn/autograd.hpp"

namespace tablatex::nn {

enum class Init { Zeros, Ones, XavierUniform, Normal };

// 64-bit FNV-1a; stable across platforms so initialization depends only on
// (parameter name, seed).
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

template <class S>
struct Param {
  std::string name;
  Mat<S> value;
  Mat<S> grad;  // empty until a backward pass touches it
};

// Named parameters in insertion order.
template <class S>
class ParamStore {
 public:
  Param<S>& add(const std::string& name, Eigen::Index rows, Eigen::Index cols, Init init, std::uint64_t seed,
                double scale = 1.0) {
    if (index_.count(name)) throw Error(ErrorKind::ConfigError, "duplicate parameter " + name);
    Param<S> p{name, Mat<S>::Zero(rows, cols), Mat<S>()};
    std::mt19937_64 rng(stable_hash(name) ^ (seed * 0x9E3779B97F4A7C15ULL));
    switch (init) {
      case Init::Zeros: break;
      case Init::Ones: p.value.setOnes(); break;
      case Init::XavierUniform: {
        const double a = scale * std::sqrt(6.0 / static_cast<double>(rows + cols));
        std::uniform_real_distribution<double> u(-a, a);
        for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = static_cast<S>(u(rng));
        break;
      }
      case Init::Normal: {
        std::normal_distribution<double> n(0.0, scale);
        for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = static_cast<S>(n(rng));
        break;
      }
    }
    index_[name] = params_.size();
    params_.push_back(std::move(p));
    return params_.back();
  }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  Param<S>& at(const std::string& name) { return params_.at(lookup(name)); }
  const Param<S>& at(const std::string& name) const { return params_.at(lookup(name)); }

  std::vector<Param<S>>& all() { return params_; }
  const std::vector<Param<S>>& all() const { return params_; }
  std::size_t size() const { return params_.size(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p.grad = Mat<S>::Zero(p.value.rows(), p.value.cols());
  }

 private:
  std::size_t lookup(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error(ErrorKind::ConfigError, "no parameter named " + name);
    return it->second;
  }

  std::vector<Param<S>> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace tablatex::nn
