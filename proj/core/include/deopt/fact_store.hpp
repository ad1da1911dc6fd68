#pragma once

#include <map>
#include <string>

#include "deopt/value.hpp"

namespace deopt {

/// Relation name -> set of tuples. Inserting an existing tuple is a no-op.
class FactStore {
 public:
  using Map = std::map<std::string, TupleSet>;

  bool insert(const std::string& rel, Tuple t) { return rels_[rel].insert(std::move(t)).second; }
  void insert_all(const std::string& rel, const TupleSet& tuples);
  void merge(const FactStore& other);

  /// Makes `rel` present (possibly empty).
  TupleSet& ensure(const std::string& rel) { return rels_[rel]; }
  void set(const std::string& rel, TupleSet tuples) { rels_[rel] = std::move(tuples); }
  void erase(const std::string& rel) { rels_.erase(rel); }

  bool contains(const std::string& rel) const { return rels_.count(rel) != 0; }
  /// Empty set when the relation is absent.
  const TupleSet& get(const std::string& rel) const;
  std::size_t size(const std::string& rel) const { return get(rel).size(); }
  std::size_t total_size() const;
  bool empty() const { return total_size() == 0; }

  const Map& relations() const { return rels_; }
  Map::const_iterator begin() const { return rels_.begin(); }
  Map::const_iterator end() const { return rels_.end(); }

  /// Equality ignores relations that are present but empty.
  friend bool operator==(const FactStore& a, const FactStore& b);

 private:
  Map rels_;
};

struct FactDiff {
  TupleSet only_in_a;
  TupleSet only_in_b;
  bool equal() const { return only_in_a.empty() && only_in_b.empty(); }
};

FactDiff diff_fact_sets(const FactStore& a, const FactStore& b, const std::string& rel);
FactDiff diff_tuple_sets(const TupleSet& a, const TupleSet& b);

}  // namespace deopt
