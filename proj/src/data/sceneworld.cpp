#include "hipcap/data/sceneworld.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "hipcap/error.hpp"
#include "hipcap/numerics/param_store.hpp"

namespace hipcap {
namespace {

constexpr std::size_t kGeometryDims = 4;

struct Shape {
    Box box;
    std::size_t shape = 0;
    std::size_t color = 0;
    long inside = -1;  // index of the enclosing shape, if nested
};

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

bool overlaps(const Box& a, const Box& b, double margin) {
    return a.x1() < b.x2() + margin && b.x1() < a.x2() + margin && a.y1() < b.y2() + margin &&
           b.y1() < a.y2() + margin;
}

// Places a box of the given size that stays `margin` away from every box in
// `avoid`; shrinks the box after repeated failures.
Box place_free(std::mt19937_64& rng, double canvas, double w, double h, const std::vector<Shape>& avoid) {
    for (int attempt = 0; attempt < 400; ++attempt) {
        if (attempt > 0 && attempt % 100 == 0) {
            w *= 0.8;
            h *= 0.8;
        }
        const double x = uniform(rng, 0.0, canvas - w);
        const double y = uniform(rng, 0.0, canvas - h);
        const Box b(x, y, x + w, y + h);
        bool clash = false;
        for (const auto& s : avoid) clash = clash || overlaps(b, s.box, 1.0);
        if (!clash) return b;
    }
    throw StateError("scene-world: could not place a shape; reduce max_shapes or shape size");
}

std::string relation_phrase(const Box& a, const Box& b, bool b_inside_a, bool inverse) {
    if (b_inside_a) return inverse ? "inside" : "around";
    const double dx = b.center_x() - a.center_x();
    const double dy = b.center_y() - a.center_y();
    if (std::abs(dy) >= std::abs(dx)) {
        const bool a_above = dy > 0.0;  // image y grows downwards
        return (a_above != inverse) ? "above" : "below";
    }
    const bool a_left = dx > 0.0;
    return (a_left != inverse) ? "to the left of" : "to the right of";
}

// Relation label of a with respect to b: 0 above, 1 below, 2 left of, 3 right of, 4 inside.
std::size_t relation_label(const Shape& a, std::size_t b_index, const Shape& b) {
    if (a.inside == static_cast<long>(b_index)) return 4;
    const double dx = b.box.center_x() - a.box.center_x();
    const double dy = b.box.center_y() - a.box.center_y();
    if (std::abs(dy) >= std::abs(dx)) return dy > 0.0 ? 0 : 1;
    return dx > 0.0 ? 2 : 3;
}

std::string with_article(const std::string& noun_phrase) {
    const char c = noun_phrase.empty() ? 'x' : noun_phrase.front();
    const bool vowel = c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
    return (vowel ? "an " : "a ") + noun_phrase;
}

}  // namespace

const std::vector<std::string>& sceneworld_shape_names() {
    static const std::vector<std::string> names{"circle", "square", "triangle", "star", "hexagon", "diamond"};
    return names;
}

const std::vector<std::string>& sceneworld_color_names() {
    static const std::vector<std::string> names{"red", "green", "blue", "yellow", "purple", "orange"};
    return names;
}

std::vector<SceneRecord> generate_sceneworld(std::uint64_t seed, std::size_t n_scenes, const SceneWorldConfig& cfg) {
    if (n_scenes < 1) throw InputError("scene-world needs at least one scene");
    if (cfg.feature_dim < kSceneWorldShapes + kSceneWorldColors + kGeometryDims) {
        throw InputError("scene-world feature_dim must be at least 16");
    }
    if (cfg.min_shapes < 2 || cfg.max_shapes < cfg.min_shapes || cfg.max_shapes > kDefaultMaxRegions) {
        throw InputError("scene-world shape counts must satisfy 2 <= min <= max <= 36");
    }
    if (cfg.captions_per_scene < 1 || cfg.captions_per_scene > 3) {
        throw InputError("scene-world captions_per_scene must lie in 1..3");
    }
    static const std::vector<std::string> numbers{"zero", "one", "two", "three", "four", "five", "six"};
    const auto& shape_names = sceneworld_shape_names();
    const auto& color_names = sceneworld_color_names();
    const double canvas = cfg.canvas;

    std::vector<SceneRecord> out;
    out.reserve(n_scenes);
    for (std::size_t s = 0; s < n_scenes; ++s) {
        std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + (s + 1) * 0xD1B54A32D192ED03ull);
        const std::size_t span = cfg.max_shapes - cfg.min_shapes + 1;
        const std::size_t k = cfg.min_shapes + std::min(span - 1, static_cast<std::size_t>(uniform01(rng) * span));
        const bool nest = uniform01(rng) < cfg.nesting_rate;

        std::vector<Shape> shapes;
        auto draw_identity = [&](Shape& sh) {
            sh.shape = static_cast<std::size_t>(uniform01(rng) * kSceneWorldShapes) % kSceneWorldShapes;
            sh.color = static_cast<std::size_t>(uniform01(rng) * kSceneWorldColors) % kSceneWorldColors;
        };
        if (nest) {
            Shape outer;
            const double w = uniform(rng, 0.30, 0.40) * canvas;
            const double h = w * uniform(rng, 0.85, 1.15);
            outer.box = place_free(rng, canvas, w, h, shapes);
            draw_identity(outer);
            shapes.push_back(outer);
            Shape inner;
            const double iw = outer.box.width() * uniform(rng, 0.45, 0.65);
            const double ih = outer.box.height() * uniform(rng, 0.45, 0.65);
            const double ix = uniform(rng, outer.box.x1() + 1.0, outer.box.x2() - iw - 1.0);
            const double iy = uniform(rng, outer.box.y1() + 1.0, outer.box.y2() - ih - 1.0);
            inner.box = Box(ix, iy, ix + iw, iy + ih);
            inner.inside = 0;
            draw_identity(inner);
            shapes.push_back(inner);
        }
        while (shapes.size() < k) {
            Shape sh;
            const double w = uniform(rng, 0.12, 0.26) * canvas;
            const double h = w * uniform(rng, 0.85, 1.15);
            sh.box = place_free(rng, canvas, w, h, shapes);
            draw_identity(sh);
            shapes.push_back(sh);
        }

        // Detector output order is arbitrary: shuffle, remapping nesting links.
        std::vector<std::size_t> perm(shapes.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        for (std::size_t i = perm.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i)) % i;
            std::swap(perm[i - 1], perm[j]);
        }
        std::vector<std::size_t> where(shapes.size());
        for (std::size_t i = 0; i < perm.size(); ++i) where[perm[i]] = i;
        std::vector<Shape> ordered(shapes.size());
        for (std::size_t i = 0; i < perm.size(); ++i) {
            ordered[i] = shapes[perm[i]];
            if (ordered[i].inside >= 0) ordered[i].inside = static_cast<long>(where[static_cast<std::size_t>(ordered[i].inside)]);
        }
        shapes = std::move(ordered);

        SceneRecord rec;
        char id[32];
        std::snprintf(id, sizeof id, "sw-%06zu", s);
        rec.image_id = id;
        for (std::size_t i = 0; i < shapes.size(); ++i) {
            const Shape& sh = shapes[i];
            Region reg;
            reg.index = i;
            reg.box = sh.box;
            reg.confidence = uniform(rng, 0.5, 1.0);
            reg.region_feature.assign(cfg.feature_dim, 0.0);
            reg.instance_feature.assign(cfg.feature_dim, 0.0);
            reg.region_feature[sh.shape] = 1.0;
            reg.region_feature[kSceneWorldShapes + sh.color] = 1.0;
            reg.instance_feature[sh.shape] = 1.0;
            reg.instance_feature[kSceneWorldShapes + sh.color] = 1.0;
            const std::size_t g = kSceneWorldShapes + kSceneWorldColors;
            reg.region_feature[g + 0] = sh.box.center_x() / canvas;
            reg.region_feature[g + 1] = sh.box.center_y() / canvas;
            reg.region_feature[g + 2] = sh.box.width() / canvas;
            reg.region_feature[g + 3] = sh.box.height() / canvas;
            for (std::size_t d = 0; d < cfg.feature_dim; ++d) {
                const bool geometry = d >= g && d < g + kGeometryDims;
                reg.region_feature[d] += (geometry ? 0.1 : 1.0) * cfg.region_noise * standard_normal(rng);
                reg.instance_feature[d] += cfg.instance_noise * standard_normal(rng);
            }
            rec.regions.push_back(std::move(reg));
        }

        // Caption subject: the largest shape; object: the shape nested in it,
        // otherwise the second largest.
        std::vector<std::size_t> by_area(shapes.size());
        for (std::size_t i = 0; i < by_area.size(); ++i) by_area[i] = i;
        std::stable_sort(by_area.begin(), by_area.end(),
                         [&](std::size_t a, std::size_t b) { return shapes[a].box.area() > shapes[b].box.area(); });
        const std::size_t a = by_area[0];
        std::size_t b = by_area[1];
        for (std::size_t i = 0; i < shapes.size(); ++i) {
            if (shapes[i].inside == static_cast<long>(a)) b = i;
        }
        const bool b_inside_a = shapes[b].inside == static_cast<long>(a);
        const std::string name_a = color_names[shapes[a].color] + " " + shape_names[shapes[a].shape];
        const std::string name_b = color_names[shapes[b].color] + " " + shape_names[shapes[b].shape];
        const std::string rel = relation_phrase(shapes[a].box, shapes[b].box, b_inside_a, false);
        const std::string inv = relation_phrase(shapes[a].box, shapes[b].box, b_inside_a, true);
        const std::string a_phrase = with_article(name_a);
        const std::string b_phrase = with_article(name_b);
        const std::vector<std::string> templates{
            a_phrase + " " + rel + " " + b_phrase,
            numbers[shapes.size()] + " shapes with " + a_phrase + " " + rel + " " + b_phrase,
            "there is " + b_phrase + " " + inv + " " + a_phrase,
        };
        rec.captions.assign(templates.begin(), templates.begin() + static_cast<std::ptrdiff_t>(cfg.captions_per_scene));

        std::set<std::size_t> labels;
        for (const auto& sh : shapes) labels.insert(sh.shape);
        rec.labels = std::vector<std::size_t>(labels.begin(), labels.end());

        std::vector<RelationEdge> edges;
        std::set<std::pair<std::size_t, std::size_t>> linked;
        for (std::size_t i = 0; i < shapes.size(); ++i) {
            std::size_t best = i;
            double best_d = 0.0;
            for (std::size_t j = 0; j < shapes.size(); ++j) {
                if (j == i) continue;
                const double dx = shapes[i].box.center_x() - shapes[j].box.center_x();
                const double dy = shapes[i].box.center_y() - shapes[j].box.center_y();
                const double d = dx * dx + dy * dy;
                if (best == i || d < best_d) {
                    best = j;
                    best_d = d;
                }
            }
            if (linked.emplace(i, best).second) edges.push_back({i, best, relation_label(shapes[i], best, shapes[best])});
        }
        rec.edges = std::move(edges);
        if (s + cfg.val_count >= n_scenes) rec.split = "val";
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace hipcap
