#ifndef CHROMOSCALE_HEADLESS_RENDER_HPP
#define CHROMOSCALE_HEADLESS_RENDER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chromoscale/geometry.hpp"
#include "chromoscale/render_list.hpp"

namespace chromoscale {

struct CameraPose {
    Vec3 eye{0, 0, 12000};
    Vec3 target{};
    Vec3 up{0, 1, 0};
    double fov_deg = 40.0;
    int width = 128;
    int height = 96;

    void check() const {
        if (width < 1 || height < 1) throw std::invalid_argument("viewport must be at least 1x1");
        if (eye == target) throw std::invalid_argument("camera eye and target coincide");
        if (!(fov_deg > 0.0 && fov_deg < 120.0)) throw std::invalid_argument("fov must be in (0, 120) degrees");
        if (norm(cross(target - eye, up)) == 0.0) throw std::invalid_argument("camera up is parallel to view direction");
    }

    double distance() const noexcept { return chromoscale::distance(eye, target); }
    bool operator==(const CameraPose&) const = default;
};

/// Fixed oblique viewing direction (target -> eye) used for snapshots and new sessions.
inline Vec3 default_view_direction() noexcept { return normalized(Vec3{0.3, 0.4, 0.866}); }

/// Camera looking at `target` from the distance that corresponds to scale s.
inline CameraPose camera_at_scale(const Vec3& target, double s, const CameraScaleConfig& cfg, double fov_deg,
                                  int width, int height) {
    CameraPose cam;
    cam.target = target;
    cam.eye = target + default_view_direction() * distance_from_scale(s, cfg);
    cam.fov_deg = fov_deg;
    cam.width = width;
    cam.height = height;
    cam.check();
    return cam;
}

/// Orthonormal view basis and per-pixel primary rays.
class ViewRays {
public:
    explicit ViewRays(const CameraPose& cam) : cam_(cam) {
        cam.check();
        forward_ = normalized(cam.target - cam.eye);
        right_ = normalized(cross(forward_, cam.up));
        up_ = cross(right_, forward_);
        tan_half_ = std::tan(cam.fov_deg * std::numbers::pi / 360.0);
        aspect_ = static_cast<double>(cam.width) / cam.height;
    }

    Vec3 direction(int px, int py) const noexcept {
        const double x = (2.0 * (px + 0.5) / cam_.width - 1.0) * tan_half_ * aspect_;
        const double y = (1.0 - 2.0 * (py + 0.5) / cam_.height) * tan_half_;
        return normalized(forward_ + right_ * x + up_ * y);
    }

    struct PixelBounds {
        int x0, y0, x1, y1;  // inclusive
        bool empty() const noexcept { return x1 < x0 || y1 < y0; }
    };

    /// Conservative pixel rectangle covered by a sphere's projection.
    PixelBounds bounds(const Vec3& center, double radius) const noexcept {
        const Vec3 rel = center - cam_.eye;
        const double zv = dot(rel, forward_);
        const PixelBounds full{0, 0, cam_.width - 1, cam_.height - 1};
        if (zv < -radius) return {0, 0, -1, -1};
        if (zv - radius <= 0.0) return full;
        const double xv = dot(rel, right_);
        const double yv = dot(rel, up_);
        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
        for (double dz : {-radius, radius}) {
            for (double d : {-radius, radius}) {
                const double sx = (xv + d) / (zv + dz);
                const double sy = (yv + d) / (zv + dz);
                xmin = std::min(xmin, sx);
                xmax = std::max(xmax, sx);
                ymin = std::min(ymin, sy);
                ymax = std::max(ymax, sy);
            }
        }
        const double kx = cam_.width / (2.0 * tan_half_ * aspect_);
        const double ky = cam_.height / (2.0 * tan_half_);
        auto clampi = [](double v, int lo, int hi) {
            return static_cast<int>(std::clamp(v, static_cast<double>(lo) - 1.0, static_cast<double>(hi) + 1.0));
        };
        PixelBounds b{};
        b.x0 = clampi(std::floor(xmin * kx + cam_.width / 2.0 - 0.5) - 1, 0, cam_.width - 1);
        b.x1 = clampi(std::ceil(xmax * kx + cam_.width / 2.0 - 0.5) + 1, 0, cam_.width - 1);
        b.y0 = clampi(std::floor(cam_.height / 2.0 - ymax * ky - 0.5) - 1, 0, cam_.height - 1);
        b.y1 = clampi(std::ceil(cam_.height / 2.0 - ymin * ky - 0.5) + 1, 0, cam_.height - 1);
        b.x0 = std::max(b.x0, 0);
        b.y0 = std::max(b.y0, 0);
        b.x1 = std::min(b.x1, cam_.width - 1);
        b.y1 = std::min(b.y1, cam_.height - 1);
        return b;
    }

    const CameraPose& camera() const noexcept { return cam_; }
    const Vec3& forward() const noexcept { return forward_; }
    const Vec3& right() const noexcept { return right_; }
    const Vec3& up() const noexcept { return up_; }

private:
    CameraPose cam_;
    Vec3 forward_, right_, up_;
    double tan_half_ = 1.0;
    double aspect_ = 1.0;
};

/// Distance along a unit ray to the first sphere surface in front of the origin.
inline std::optional<double> ray_sphere(const Vec3& origin, const Vec3& dir, const Vec3& center, double radius) noexcept {
    const Vec3 oc = origin - center;
    const double b = dot(oc, dir);
    const double c = dot(oc, oc) - radius * radius;
    const double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    double t = -b - sq;
    if (t <= 0.0) t = -b + sq;
    if (t <= 0.0) return std::nullopt;
    return t;
}

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgba;

    Image() = default;
    Image(int w, int h) : width(w), height(h), rgba(static_cast<std::size_t>(w) * h * 4, 255) {}

    Rgba8 pixel(int x, int y) const {
        const auto* p = &rgba.at((static_cast<std::size_t>(y) * width + x) * 4);
        return {p[0], p[1], p[2], p[3]};
    }
    bool operator==(const Image&) const = default;
};

namespace detail {

// Strict total order over instances so depth ties resolve independently of submission order.
inline bool wins_tie(const Instance& a, const Instance& b) noexcept {
    if (a.ref != b.ref) return a.ref < b.ref;
    const auto ka = std::make_tuple(a.color.r, a.color.g, a.color.b, a.alpha, a.radius, a.ssao_weight);
    const auto kb = std::make_tuple(b.color.r, b.color.g, b.color.b, b.alpha, b.radius, b.ssao_weight);
    return ka < kb;
}

}  // namespace detail

inline constexpr double kAmbientShare = 0.3;

/// Reference sphere-impostor rasterizer. Each batch is depth-tested on its own and then
/// composited over the previous output in draw order onto a white canvas.
inline Image render(const RenderList& list, const CameraPose& cam) {
    const ViewRays rays(cam);
    const int w = cam.width;
    const int h = cam.height;
    const std::size_t pixels = static_cast<std::size_t>(w) * h;
    std::vector<double> frame(pixels * 3, 1.0);
    const Vec3 light = normalized(rays.forward() * -0.6 + rays.up() * 0.6 - rays.right() * 0.5);

    std::vector<const RenderBatch*> ordered;
    for (const auto& b : list.batches) ordered.push_back(&b);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const RenderBatch* a, const RenderBatch* b) { return a->draw_order < b->draw_order; });

    std::vector<double> depth(pixels);
    std::vector<const Instance*> winner(pixels);
    for (const RenderBatch* batch : ordered) {
        std::fill(depth.begin(), depth.end(), std::numeric_limits<double>::infinity());
        std::fill(winner.begin(), winner.end(), nullptr);
        for (const auto& inst : batch->instances) {
            const Vec3 center = to_double(inst.position);
            const double radius = inst.radius;
            const auto box = rays.bounds(center, radius);
            if (box.empty()) continue;
            for (int y = box.y0; y <= box.y1; ++y) {
                for (int x = box.x0; x <= box.x1; ++x) {
                    const auto t = ray_sphere(cam.eye, rays.direction(x, y), center, radius);
                    if (!t) continue;
                    const std::size_t i = static_cast<std::size_t>(y) * w + x;
                    if (*t < depth[i] || (*t == depth[i] && winner[i] && detail::wins_tie(inst, *winner[i]))) {
                        depth[i] = *t;
                        winner[i] = &inst;
                    }
                }
            }
        }
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                const Instance* inst = winner[i];
                if (!inst) continue;
                const Vec3 dir = rays.direction(x, y);
                const Vec3 normal = normalized(cam.eye + dir * depth[i] - to_double(inst->position));
                const double lambert = std::max(0.0, dot(normal, light));
                const double hemi = 0.5 + 0.5 * dot(normal, rays.up());
                const double ws = inst->ssao_weight;
                const double shade = (1.0 - ws) + ws * (kAmbientShare * hemi + (1.0 - kAmbientShare) * lambert);
                const double a = inst->alpha;
                const double src[3] = {inst->color.r / 255.0 * shade, inst->color.g / 255.0 * shade,
                                       inst->color.b / 255.0 * shade};
                for (int c = 0; c < 3; ++c) frame[i * 3 + c] = src[c] * a + frame[i * 3 + c] * (1.0 - a);
            }
        }
    }

    Image img(w, h);
    for (std::size_t i = 0; i < pixels; ++i) {
        for (int c = 0; c < 3; ++c) {
            img.rgba[i * 4 + c] = static_cast<std::uint8_t>(std::lround(std::clamp(frame[i * 3 + c], 0.0, 1.0) * 255.0));
        }
        img.rgba[i * 4 + 3] = 255;
    }
    return img;
}

inline constexpr double kPickAlphaThreshold = 0.5;

struct PickHit {
    ElementRef ref;
    double depth = 0.0;
    BatchRole role = BatchRole::CoarseShaded;

    bool operator==(const PickHit&) const = default;
};

/// Nearest instance under the pixel among those with alpha >= 0.5.
inline std::optional<PickHit> pick(const RenderList& list, const CameraPose& cam, int px, int py) {
    const ViewRays rays(cam);
    if (px < 0 || py < 0 || px >= cam.width || py >= cam.height) throw std::out_of_range("pick pixel outside viewport");
    const Vec3 dir = rays.direction(px, py);
    std::optional<PickHit> best;
    for (const auto& batch : list.batches) {
        for (const auto& inst : batch.instances) {
            if (inst.alpha < kPickAlphaThreshold) continue;
            const Vec3 center = to_double(inst.position);
            const auto box = rays.bounds(center, inst.radius);
            if (px < box.x0 || px > box.x1 || py < box.y0 || py > box.y1) continue;
            const auto t = ray_sphere(cam.eye, dir, center, inst.radius);
            if (t && (!best || *t < best->depth)) best = PickHit{inst.ref, *t, batch.role};
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// PPM (P6)

class ImageIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string encode_ppm(const Image& img) {
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.reserve(out.size() + static_cast<std::size_t>(img.width) * img.height * 3);
    for (std::size_t i = 0; i < img.rgba.size(); i += 4) {
        out.push_back(static_cast<char>(img.rgba[i]));
        out.push_back(static_cast<char>(img.rgba[i + 1]));
        out.push_back(static_cast<char>(img.rgba[i + 2]));
    }
    return out;
}

inline void write_image(const Image& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageIoError("cannot open " + path.string() + " for writing");
    const std::string bytes = encode_ppm(img);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ImageIoError("write failed for " + path.string());
}

inline Image read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageIoError("cannot open " + path.string());
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P6" || w < 1 || h < 1 || maxval != 255) throw ImageIoError("unsupported PPM header in " + path.string());
    in.get();
    Image img(w, h);
    std::vector<char> rgb(static_cast<std::size_t>(w) * h * 3);
    in.read(rgb.data(), static_cast<std::streamsize>(rgb.size()));
    if (in.gcount() != static_cast<std::streamsize>(rgb.size())) throw ImageIoError("truncated PPM " + path.string());
    for (std::size_t i = 0, j = 0; i < rgb.size(); i += 3, j += 4) {
        img.rgba[j] = static_cast<std::uint8_t>(rgb[i]);
        img.rgba[j + 1] = static_cast<std::uint8_t>(rgb[i + 1]);
        img.rgba[j + 2] = static_cast<std::uint8_t>(rgb[i + 2]);
    }
    return img;
}

}  // namespace chromoscale

#endif  // CHROMOSCALE_HEADLESS_RENDER_HPP
