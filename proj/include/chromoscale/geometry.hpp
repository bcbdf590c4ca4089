#ifndef CHROMOSCALE_GEOMETRY_HPP
#define CHROMOSCALE_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace chromoscale {

/// 3D point or vector in nanometers.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const noexcept { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const noexcept { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const noexcept { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const noexcept { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const noexcept { return {x / s, y / s, z / s}; }
    constexpr Vec3& operator+=(const Vec3& o) noexcept { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) noexcept { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr bool operator==(const Vec3&) const noexcept = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) noexcept { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) noexcept { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) noexcept {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) noexcept { return std::sqrt(dot(v, v)); }

inline double distance(const Vec3& a, const Vec3& b) noexcept { return norm(a - b); }

inline Vec3 normalized(const Vec3& v) noexcept { return v / norm(v); }

inline bool is_finite(const Vec3& v) noexcept {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Compact single-precision point used in render instances.
struct Vec3f {
    float x = 0.0F;
    float y = 0.0F;
    float z = 0.0F;

    constexpr bool operator==(const Vec3f&) const noexcept = default;
};

inline Vec3f to_float(const Vec3& v) noexcept {
    return {static_cast<float>(v.x), static_cast<float>(v.y), static_cast<float>(v.z)};
}

inline Vec3 to_double(const Vec3f& v) noexcept { return {v.x, v.y, v.z}; }

class DegenerateFrameError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rigid local coordinate frame. `axes` are orthonormal and right-handed.
struct Frame {
    Vec3 origin{};
    std::array<Vec3, 3> axes{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};

    /// Local -> world.
    Vec3 apply(const Vec3& local) const noexcept {
        return origin + axes[0] * local.x + axes[1] * local.y + axes[2] * local.z;
    }

    /// Rotation only (no translation).
    Vec3 rotate(const Vec3& local) const noexcept {
        return axes[0] * local.x + axes[1] * local.y + axes[2] * local.z;
    }

    bool operator==(const Frame&) const noexcept = default;
};

/// Frame completion for a given first axis: second = normalize(first x g), g = +z unless
/// the first axis is within ~8 degrees of z, then +x.
inline Frame frame_from_direction(const Vec3& origin, const Vec3& direction) {
    const double len = norm(direction);
    if (!(len > 0.0) || !std::isfinite(len)) {
        throw DegenerateFrameError("cannot build frame from zero-length direction");
    }
    const Vec3 first = direction / len;
    const Vec3 guide = std::abs(first.z) > 0.99 ? Vec3{1, 0, 0} : Vec3{0, 0, 1};
    const Vec3 second = normalized(cross(first, guide));
    const Vec3 third = cross(first, second);
    return Frame{origin, {first, second, third}};
}

/// Orientation of a nucleosome at `p` from the position of its successor.
inline Frame nucleosome_frame(const Vec3& p, const Vec3& p_next) {
    if (p == p_next) {
        throw DegenerateFrameError("coincident consecutive nucleosome positions");
    }
    return frame_from_direction(p, p_next - p);
}

}  // namespace chromoscale

#endif  // CHROMOSCALE_GEOMETRY_HPP
