#pragma once

#include <cstddef>
#include <vector>

#include <boost/multi_index/identity.hpp>
#include <boost/multi_index/ranked_index.hpp>
#include <boost/multi_index_container.hpp>

namespace funflow {

/// Ordered multiset of distances with O(log n) insertion and O(log n) rank queries.
class SortedDistances {
public:
    SortedDistances() = default;
    template <class It>
    SortedDistances(It first, It last) {
        for (; first != last; ++first) insert(*first);
    }

    void insert(double d) { set_.insert(d); }
    std::size_t size() const noexcept { return set_.size(); }
    bool empty() const noexcept { return set_.empty(); }

    /// Number of stored distances <= t.
    std::size_t count_at_most(double t) const { return set_.rank(set_.upper_bound(t)); }
    double min() const { return *set_.begin(); }
    double max() const { return *set_.rbegin(); }

    auto begin() const { return set_.begin(); }
    auto end() const { return set_.end(); }
    std::vector<double> to_vector() const { return {set_.begin(), set_.end()}; }

private:
    using Container = boost::multi_index_container<
        double, boost::multi_index::indexed_by<boost::multi_index::ranked_non_unique<boost::multi_index::identity<double>>>>;
    Container set_;
};

}  // namespace funflow
