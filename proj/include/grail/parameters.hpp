#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "grail/common.hpp"

namespace grail {

struct SegmentSpec {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
};

// Canonical flattening of all trainable parameters. Segment order is fixed
// at construction (encoder segments first, then task-head segments) and is
// identical across runs with the same configuration.
class ParameterLayout {
public:
    std::size_t add(std::string name, std::vector<std::size_t> shape) {
        if (index_.count(name)) throw std::invalid_argument("duplicate segment: " + name);
        SegmentSpec seg;
        seg.name = std::move(name);
        seg.shape = std::move(shape);
        seg.size = 1;
        for (std::size_t d : seg.shape) seg.size *= d;
        seg.offset = total_;
        total_ += seg.size;
        index_.emplace(seg.name, segments_.size());
        segments_.push_back(std::move(seg));
        return segments_.size() - 1;
    }

    const SegmentSpec& segment(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end())
            throw std::invalid_argument("unknown parameter segment: " + std::string(name));
        return segments_[it->second];
    }

    bool has_segment(std::string_view name) const {
        return index_.count(std::string(name)) != 0;
    }

    const std::vector<SegmentSpec>& segments() const { return segments_; }
    std::size_t total_size() const { return total_; }

    bool same_as(const ParameterLayout& other) const {
        if (this == &other) return true;
        if (segments_.size() != other.segments_.size() || total_ != other.total_) return false;
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            if (segments_[i].name != other.segments_[i].name ||
                segments_[i].shape != other.segments_[i].shape)
                return false;
        }
        return true;
    }

    // Name of the segment that owns flat index `i`.
    const std::string& segment_of_index(std::size_t i) const {
        for (const auto& s : segments_) {
            if (i >= s.offset && i < s.offset + s.size) return s.name;
        }
        throw std::invalid_argument("flat index out of range");
    }

private:
    std::vector<SegmentSpec> segments_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t total_ = 0;
};

using LayoutPtr = std::shared_ptr<const ParameterLayout>;

namespace detail {

template <typename Derived>
class FlatVector {
public:
    explicit FlatVector(LayoutPtr layout)
        : layout_(std::move(layout)), values_(layout_->total_size(), 0.0) {}

    const ParameterLayout& layout() const { return *layout_; }
    const LayoutPtr& layout_ptr() const { return layout_; }

    std::span<double> segment(std::string_view name) {
        const auto& s = layout_->segment(name);
        return {values_.data() + s.offset, s.size};
    }
    std::span<const double> segment(std::string_view name) const {
        const auto& s = layout_->segment(name);
        return {values_.data() + s.offset, s.size};
    }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    // Throws naming the offending segment.
    void check_finite(std::string_view what) const {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw std::runtime_error(std::string(what) + ": non-finite value in segment '" +
                                         layout_->segment_of_index(i) + "'");
            }
        }
    }

protected:
    LayoutPtr layout_;
    std::vector<double> values_;
};

}  // namespace detail

class ParameterVector : public detail::FlatVector<ParameterVector> {
public:
    using detail::FlatVector<ParameterVector>::FlatVector;
};

class GradientVector : public detail::FlatVector<GradientVector> {
public:
    using detail::FlatVector<GradientVector>::FlatVector;

    void zero() { std::fill(values_.begin(), values_.end(), 0.0); }

    void scale(double c) {
        for (double& v : values_) v *= c;
    }

    // this += c * other
    void axpy(double c, const GradientVector& other) {
        require_same_layout(other);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += c * other.values_[i];
    }

    double dot(const GradientVector& other) const {
        require_same_layout(other);
        double s = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * other.values_[i];
        return s;
    }

    double norm() const { return std::sqrt(dot(*this)); }

    void require_same_layout(const GradientVector& other) const {
        if (!layout_->same_as(other.layout()))
            throw std::invalid_argument("gradient layout mismatch");
    }
};

inline void require_matching_layout(const ParameterVector& p, const GradientVector& g) {
    if (!p.layout().same_as(g.layout()))
        throw std::invalid_argument("parameter/gradient layout mismatch");
}

}  // namespace grail
