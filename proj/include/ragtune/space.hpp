#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ragtune/text.hpp"

namespace ragtune {

// One discrete value a dimension can take: an integer (top-k), a real
// (compression ratio) or a label (embedding model name).
using Level = std::variant<std::int64_t, double, std::string>;

inline std::string level_to_string(const Level& level) {
  struct V {
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return fmt_double(v); }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(V{}, level);
}

inline bool level_is_numeric(const Level& level) {
  return !std::holds_alternative<std::string>(level);
}

struct Dimension {
  std::string name;
  std::vector<Level> levels;

  bool operator==(const Dimension&) const = default;
};

// A fully specified combination: one level index per dimension.
struct Config {
  std::vector<std::size_t> level_indices;

  bool operator==(const Config&) const = default;
  auto operator<=>(const Config&) const = default;
};

// The discrete search space: named dimensions, each with an ordered,
// duplicate-free list of levels. Immutable after construction.
class HyperParamSpace {
 public:
  HyperParamSpace() = default;

  explicit HyperParamSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("HyperParamSpace: at least one dimension required");
    for (std::size_t d = 0; d < dims_.size(); ++d) {
      const auto& dim = dims_[d];
      if (dim.name.empty()) throw std::invalid_argument("HyperParamSpace: dimension name must not be empty");
      if (dim.levels.size() < 2)
        throw std::invalid_argument("HyperParamSpace: dimension '" + dim.name + "' needs at least two levels");
      for (std::size_t i = 0; i < dim.levels.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
          if (dim.levels[i] == dim.levels[j])
            throw std::invalid_argument("HyperParamSpace: duplicate level '" + level_to_string(dim.levels[i]) +
                                        "' in dimension '" + dim.name + "'");
      for (std::size_t e = 0; e < d; ++e)
        if (dims_[e].name == dim.name)
          throw std::invalid_argument("HyperParamSpace: duplicate dimension name '" + dim.name + "'");
    }
  }

  std::size_t dim_count() const { return dims_.size(); }
  const Dimension& dim(std::size_t i) const { return dims_.at(i); }
  const std::vector<Dimension>& dims() const { return dims_; }

  std::size_t cardinality() const {
    if (dims_.empty()) return 0;
    std::size_t c = 1;
    for (const auto& d : dims_) c *= d.levels.size();
    return c;
  }

  bool valid_config(const Config& c) const {
    if (c.level_indices.size() != dims_.size()) return false;
    for (std::size_t d = 0; d < dims_.size(); ++d)
      if (c.level_indices[d] >= dims_[d].levels.size()) return false;
    return true;
  }

  void require_config(const Config& c) const {
    if (!valid_config(c)) throw std::invalid_argument("config does not fit this space");
  }

  // Row-major flat index; its order coincides with lexicographic order of
  // the level-index vectors.
  std::size_t flat_index(const Config& c) const {
    require_config(c);
    std::size_t idx = 0;
    for (std::size_t d = 0; d < dims_.size(); ++d) idx = idx * dims_[d].levels.size() + c.level_indices[d];
    return idx;
  }

  Config config_at(std::size_t flat) const {
    if (flat >= cardinality()) throw std::out_of_range("config index out of range");
    Config c;
    c.level_indices.resize(dims_.size());
    for (std::size_t d = dims_.size(); d-- > 0;) {
      const std::size_t n = dims_[d].levels.size();
      c.level_indices[d] = flat % n;
      flat /= n;
    }
    return c;
  }

  Config midpoint_config() const {
    Config c;
    c.level_indices.reserve(dims_.size());
    for (const auto& d : dims_) c.level_indices.push_back(d.levels.size() / 2);
    return c;
  }

  std::optional<std::size_t> dim_index(std::string_view name) const {
    for (std::size_t d = 0; d < dims_.size(); ++d)
      if (dims_[d].name == name) return d;
    return std::nullopt;
  }

  const Level& level_of(const Config& c, std::size_t d) const { return dims_.at(d).levels.at(c.level_indices.at(d)); }

  std::string config_to_string(const Config& c) const {
    require_config(c);
    std::string s = "{";
    for (std::size_t d = 0; d < dims_.size(); ++d) {
      if (d) s += ", ";
      s += dims_[d].name + "=" + level_to_string(level_of(c, d));
    }
    return s + "}";
  }

  bool operator==(const HyperParamSpace&) const = default;

 private:
  std::vector<Dimension> dims_;
};

// The stock RAG tuning space: top-k chunks, compression ratio and
// (optionally) the embedding model used for ranking.
inline HyperParamSpace default_rag_space(bool with_embedding = true) {
  std::vector<Dimension> dims;
  dims.push_back({"top_k",
                  {Level{std::int64_t{1}}, Level{std::int64_t{3}}, Level{std::int64_t{5}}, Level{std::int64_t{7}},
                   Level{std::int64_t{9}}}});
  dims.push_back({"compression", {Level{0.3}, Level{0.5}, Level{0.7}, Level{0.9}, Level{1.0}}});
  if (with_embedding)
    dims.push_back({"embedding", {Level{std::string{"mpnet"}}, Level{std::string{"ada_002"}}, Level{std::string{"contriever"}}}});
  return HyperParamSpace(std::move(dims));
}

}  // namespace ragtune
