#include "deopt/fact_store.hpp"

#include <algorithm>
#include <iterator>

namespace deopt {

void FactStore::insert_all(const std::string& rel, const TupleSet& tuples) {
  auto& dst = rels_[rel];
  dst.insert(tuples.begin(), tuples.end());
}

void FactStore::merge(const FactStore& other) {
  for (const auto& [rel, tuples] : other.rels_) insert_all(rel, tuples);
}

const TupleSet& FactStore::get(const std::string& rel) const {
  static const TupleSet kEmpty;
  auto it = rels_.find(rel);
  return it == rels_.end() ? kEmpty : it->second;
}

std::size_t FactStore::total_size() const {
  std::size_t n = 0;
  for (const auto& [rel, tuples] : rels_) n += tuples.size();
  return n;
}

bool operator==(const FactStore& a, const FactStore& b) {
  for (const auto& [rel, tuples] : a.rels_)
    if (tuples != b.get(rel)) return false;
  for (const auto& [rel, tuples] : b.rels_)
    if (tuples != a.get(rel)) return false;
  return true;
}

FactDiff diff_tuple_sets(const TupleSet& a, const TupleSet& b) {
  FactDiff d;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::inserter(d.only_in_a, d.only_in_a.end()));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(),
                      std::inserter(d.only_in_b, d.only_in_b.end()));
  return d;
}

FactDiff diff_fact_sets(const FactStore& a, const FactStore& b, const std::string& rel) {
  return diff_tuple_sets(a.get(rel), b.get(rel));
}

}  // namespace deopt
