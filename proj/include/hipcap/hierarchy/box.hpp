#pragma once

#include <cstddef>
#include <vector>

namespace hipcap {

/// Axis-aligned rectangle in pixel coordinates with strictly positive area.
class Box {
public:
    Box() = default;
    /// Throws InputError unless x2 > x1 and y2 > y1 (and all are finite).
    Box(double x1, double y1, double x2, double y2);

    double x1() const noexcept { return x1_; }
    double y1() const noexcept { return y1_; }
    double x2() const noexcept { return x2_; }
    double y2() const noexcept { return y2_; }
    double width() const noexcept { return x2_ - x1_; }
    double height() const noexcept { return y2_ - y1_; }
    double area() const noexcept { return width() * height(); }
    double center_x() const noexcept { return 0.5 * (x1_ + x2_); }
    double center_y() const noexcept { return 0.5 * (y1_ + y2_); }

    friend bool operator==(const Box&, const Box&) = default;

private:
    double x1_ = 0.0, y1_ = 0.0, x2_ = 1.0, y2_ = 1.0;
};

/// Intersection over union; 0 for disjoint boxes, 1 for identical ones.
double iou(const Box& a, const Box& b);

/// A detected object: its box plus region-level and instance-level features.
struct Region {
    std::size_t index = 0;
    Box box;
    double confidence = 1.0;
    std::vector<double> region_feature;
    std::vector<double> instance_feature;
};

}  // namespace hipcap
