#pragma once

#include <string>

namespace mrkit {

/** Plain 2x2 matrix over any ring with value semantics. */
template <class T>
struct Mat2 {
    T a, b, c, d;  // row by row: [[a, b], [c, d]]

    friend Mat2 operator+(const Mat2& x, const Mat2& y) {
        return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
    }

    friend Mat2 operator-(const Mat2& x, const Mat2& y) {
        return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
    }

    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }

    template <class S>
    Mat2 scaled(const S& s) const {
        return {a * s, b * s, c * s, d * s};
    }

    template <class F>
    auto map(F&& f) const -> Mat2<decltype(f(a))> {
        return {f(a), f(b), f(c), f(d)};
    }

    T trace() const { return a + d; }
    T det() const { return a * d - b * c; }

    bool is_zero() const { return a.is_zero() && b.is_zero() && c.is_zero() && d.is_zero(); }

    bool agrees_with(const Mat2& y) const {
        return a.agrees_with(y.a) && b.agrees_with(y.b) && c.agrees_with(y.c) &&
               d.agrees_with(y.d);
    }

    std::string to_string() const {
        return "[[" + a.to_string() + ", " + b.to_string() + "], [" + c.to_string() + ", " +
               d.to_string() + "]]";
    }
};

template <class T>
Mat2<T> commutator(const Mat2<T>& x, const Mat2<T>& y) {
    return x * y - y * x;
}

} // namespace mrkit
