#include "hipcap/hierarchy/box.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hipcap/error.hpp"

namespace hipcap {

Box::Box(double x1, double y1, double x2, double y2) : x1_(x1), y1_(y1), x2_(x2), y2_(y2) {
    const bool finite = std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2);
    if (!finite || !(x2 > x1) || !(y2 > y1)) {
        throw InputError("degenerate box (" + std::to_string(x1) + ", " + std::to_string(y1) + ", " +
                         std::to_string(x2) + ", " + std::to_string(y2) + ")");
    }
}

double iou(const Box& a, const Box& b) {
    const double iw = std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
    const double ih = std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

}  // namespace hipcap
