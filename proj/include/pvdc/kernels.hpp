#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pvdc/base.hpp"

// Dense kernels behind the tensor ops. Every kernel exists twice:
//
//   kern::serial::*  - naive reference loops, kept for testing and benchmarks
//   kern::par::*     - OpenMP versions parallelized over independent outputs
//
// Both variants accumulate into each output element in the same fixed index
// order, so their results are bit-identical for any thread count. Tests
// assert exact equality; the bench target compares wall time.

namespace pvdc::kern {

template <class T>
inline T sq_dist3(const T* a, const T* b) {
    const T dx = a[0] - b[0];
    const T dy = a[1] - b[1];
    const T dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

namespace serial {

// out[n,j] = bias[j] + sum_i x[n,i] * w[i,j]
template <class T>
void matmul_bias(const T* x, std::size_t n, std::size_t ci, const T* w, std::size_t co,
                 const T* bias, T* out) {
    for (std::size_t row = 0; row < n; ++row) {
        T* o = out + row * co;
        for (std::size_t j = 0; j < co; ++j) o[j] = bias ? bias[j] : T(0);
        const T* xr = x + row * ci;
        for (std::size_t i = 0; i < ci; ++i) {
            const T xv = xr[i];
            const T* wr = w + i * co;
            for (std::size_t j = 0; j < co; ++j) o[j] += xv * wr[j];
        }
    }
}

// gx[n,i] = sum_j g[n,j] * w[i,j]
template <class T>
void matmul_grad_x(const T* g, std::size_t n, std::size_t co, const T* w, std::size_t ci, T* gx) {
    for (std::size_t row = 0; row < n; ++row) {
        const T* gr = g + row * co;
        T* o = gx + row * ci;
        for (std::size_t i = 0; i < ci; ++i) {
            T acc = T(0);
            const T* wr = w + i * co;
            for (std::size_t j = 0; j < co; ++j) acc += gr[j] * wr[j];
            o[i] += acc;
        }
    }
}

// gw[i,j] = sum_n x[n,i] * g[n,j]
template <class T>
void matmul_grad_w(const T* x, const T* g, std::size_t n, std::size_t ci, std::size_t co, T* gw) {
    for (std::size_t i = 0; i < ci; ++i) {
        T* o = gw + i * co;
        for (std::size_t row = 0; row < n; ++row) {
            const T xv = x[row * ci + i];
            const T* gr = g + row * co;
            for (std::size_t j = 0; j < co; ++j) o[j] += xv * gr[j];
        }
    }
}

// gb[j] = sum_n g[n,j]
template <class T>
void colsum(const T* g, std::size_t n, std::size_t co, T* gb) {
    for (std::size_t j = 0; j < co; ++j) {
        T acc = T(0);
        for (std::size_t row = 0; row < n; ++row) acc += g[row * co + j];
        gb[j] += acc;
    }
}

// Cross-correlation. in: [ci, r^3], k: [co, ci, k^3], out: [co, ro^3] with
// ro = (r + 2p - k)/s + 1. Out-of-range taps are skipped, never added as 0.
template <class T>
void conv3d_fwd(const T* in, std::size_t ci, std::size_t r, const T* kern, std::size_t co,
                std::size_t k, const T* bias, std::size_t stride, std::ptrdiff_t pad, T* out,
                std::size_t ro) {
    const std::size_t rvol = r * r * r;
    const std::size_t ovol = ro * ro * ro;
    for (std::size_t oc = 0; oc < co; ++oc) {
        T* oplane = out + oc * ovol;
        for (std::size_t oz = 0; oz < ro; ++oz)
            for (std::size_t oy = 0; oy < ro; ++oy)
                for (std::size_t ox = 0; ox < ro; ++ox) {
                    T acc = bias ? bias[oc] : T(0);
                    for (std::size_t ic = 0; ic < ci; ++ic) {
                        const T* iplane = in + ic * rvol;
                        const T* kplane = kern + (oc * ci + ic) * k * k * k;
                        for (std::size_t tz = 0; tz < k; ++tz) {
                            const std::ptrdiff_t iz = std::ptrdiff_t(oz * stride) - pad + std::ptrdiff_t(tz);
                            if (iz < 0 || iz >= std::ptrdiff_t(r)) continue;
                            for (std::size_t ty = 0; ty < k; ++ty) {
                                const std::ptrdiff_t iy = std::ptrdiff_t(oy * stride) - pad + std::ptrdiff_t(ty);
                                if (iy < 0 || iy >= std::ptrdiff_t(r)) continue;
                                for (std::size_t tx = 0; tx < k; ++tx) {
                                    const std::ptrdiff_t ix = std::ptrdiff_t(ox * stride) - pad + std::ptrdiff_t(tx);
                                    if (ix < 0 || ix >= std::ptrdiff_t(r)) continue;
                                    acc += kplane[(tz * k + ty) * k + tx] *
                                           iplane[(std::size_t(iz) * r + std::size_t(iy)) * r + std::size_t(ix)];
                                }
                            }
                        }
                    }
                    oplane[(oz * ro + oy) * ro + ox] = acc;
                }
    }
}

// Transposed correlation (scatter-add of kernel copies scaled by each input
// value). in: [ci, r^3], k: [ci, co, k^3], out: [co, ro^3] with
// ro = (r - 1)*s - 2p + k.
template <class T>
void deconv3d_fwd(const T* in, std::size_t ci, std::size_t r, const T* kern, std::size_t co,
                  std::size_t k, const T* bias, std::size_t stride, std::ptrdiff_t pad, T* out,
                  std::size_t ro) {
    const std::size_t rvol = r * r * r;
    const std::size_t ovol = ro * ro * ro;
    for (std::size_t oc = 0; oc < co; ++oc) {
        T* oplane = out + oc * ovol;
        const T b = bias ? bias[oc] : T(0);
        for (std::size_t i = 0; i < ovol; ++i) oplane[i] = b;
        for (std::size_t ic = 0; ic < ci; ++ic) {
            const T* iplane = in + ic * rvol;
            const T* kplane = kern + (ic * co + oc) * k * k * k;
            for (std::size_t iz = 0; iz < r; ++iz)
                for (std::size_t iy = 0; iy < r; ++iy)
                    for (std::size_t ix = 0; ix < r; ++ix) {
                        const T v = iplane[(iz * r + iy) * r + ix];
                        for (std::size_t tz = 0; tz < k; ++tz) {
                            const std::ptrdiff_t oz = std::ptrdiff_t(iz * stride) - pad + std::ptrdiff_t(tz);
                            if (oz < 0 || oz >= std::ptrdiff_t(ro)) continue;
                            for (std::size_t ty = 0; ty < k; ++ty) {
                                const std::ptrdiff_t oy = std::ptrdiff_t(iy * stride) - pad + std::ptrdiff_t(ty);
                                if (oy < 0 || oy >= std::ptrdiff_t(ro)) continue;
                                for (std::size_t tx = 0; tx < k; ++tx) {
                                    const std::ptrdiff_t ox = std::ptrdiff_t(ix * stride) - pad + std::ptrdiff_t(tx);
                                    if (ox < 0 || ox >= std::ptrdiff_t(ro)) continue;
                                    oplane[(std::size_t(oz) * ro + std::size_t(oy)) * ro + std::size_t(ox)] +=
                                        v * kplane[(tz * k + ty) * k + tx];
                                }
                            }
                        }
                    }
        }
    }
}

// gk[b, a, t] = sum_o g[b, o] * x[a, o*s - p + t]
// (kernel gradient of conv3d; with x and g swapped it is the kernel gradient
// of deconv3d, transposed into its [ci, co] layout by the caller)
template <class T>
void conv3d_grad_kernel(const T* x, std::size_t ca, std::size_t r, const T* g, std::size_t cb,
                        std::size_t ro, std::size_t k, std::size_t stride, std::ptrdiff_t pad,
                        T* gk) {
    const std::size_t rvol = r * r * r;
    const std::size_t ovol = ro * ro * ro;
    for (std::size_t b = 0; b < cb; ++b) {
        const T* gplane = g + b * ovol;
        for (std::size_t a = 0; a < ca; ++a) {
            const T* xplane = x + a * rvol;
            T* gkp = gk + (b * ca + a) * k * k * k;
            for (std::size_t tz = 0; tz < k; ++tz)
                for (std::size_t ty = 0; ty < k; ++ty)
                    for (std::size_t tx = 0; tx < k; ++tx) {
                        T acc = T(0);
                        for (std::size_t oz = 0; oz < ro; ++oz) {
                            const std::ptrdiff_t iz = std::ptrdiff_t(oz * stride) - pad + std::ptrdiff_t(tz);
                            if (iz < 0 || iz >= std::ptrdiff_t(r)) continue;
                            for (std::size_t oy = 0; oy < ro; ++oy) {
                                const std::ptrdiff_t iy = std::ptrdiff_t(oy * stride) - pad + std::ptrdiff_t(ty);
                                if (iy < 0 || iy >= std::ptrdiff_t(r)) continue;
                                for (std::size_t ox = 0; ox < ro; ++ox) {
                                    const std::ptrdiff_t ix = std::ptrdiff_t(ox * stride) - pad + std::ptrdiff_t(tx);
                                    if (ix < 0 || ix >= std::ptrdiff_t(r)) continue;
                                    acc += gplane[(oz * ro + oy) * ro + ox] *
                                           xplane[(std::size_t(iz) * r + std::size_t(iy)) * r + std::size_t(ix)];
                                }
                            }
                        }
                        gkp[(tz * k + ty) * k + tx] += acc;
                    }
        }
    }
}

// gb[c] += sum over spatial of g[c, :]
template <class T>
void channel_spatial_sum(const T* g, std::size_t c, std::size_t vol, T* gb) {
    for (std::size_t ch = 0; ch < c; ++ch) {
        T acc = T(0);
        const T* p = g + ch * vol;
        for (std::size_t i = 0; i < vol; ++i) acc += p[i];
        gb[ch] += acc;
    }
}

// Trilinear interpolation of cell-center values at arbitrary points.
// grid: [c, r^3], coords: [n, 3], out: [n, c]. Cell i has its center at
// (i + 0.5)/r; indices clamp at the boundary so the interpolant is constant
// outside the outermost cell centers.
template <class T>
void devox_fwd(const T* grid, std::size_t c, std::size_t r, const T* coords, std::size_t n,
               T* out) {
    const std::size_t vol = r * r * r;
    for (std::size_t pt = 0; pt < n; ++pt) {
        const T* p = coords + pt * 3;
        std::size_t i0[3], i1[3];
        T w1[3];
        for (int a = 0; a < 3; ++a) {
            const T u = p[a] * T(r) - T(0.5);
            const T f = std::floor(u);
            const std::ptrdiff_t base = std::ptrdiff_t(f);
            const std::ptrdiff_t rmax = std::ptrdiff_t(r) - 1;
            i0[a] = std::size_t(std::min(std::max(base, std::ptrdiff_t(0)), rmax));
            i1[a] = std::size_t(std::min(std::max(base + 1, std::ptrdiff_t(0)), rmax));
            w1[a] = u - f;
        }
        T wgt[8];
        std::size_t cell[8];
        for (int corner = 0; corner < 8; ++corner) {
            const int cz = (corner >> 2) & 1, cy = (corner >> 1) & 1, cx = corner & 1;
            const T wz = cz ? w1[2] : T(1) - w1[2];
            const T wy = cy ? w1[1] : T(1) - w1[1];
            const T wx = cx ? w1[0] : T(1) - w1[0];
            wgt[corner] = wz * wy * wx;
            const std::size_t z = cz ? i1[2] : i0[2];
            const std::size_t y = cy ? i1[1] : i0[1];
            const std::size_t x = cx ? i1[0] : i0[0];
            cell[corner] = (z * r + y) * r + x;
        }
        T* o = out + pt * c;
        for (std::size_t ch = 0; ch < c; ++ch) {
            T acc = T(0);
            const T* gp = grid + ch * vol;
            for (int corner = 0; corner < 8; ++corner) acc += wgt[corner] * gp[cell[corner]];
            o[ch] = acc;
        }
    }
}

// Exact nearest neighbor by linear scan; ties broken by lowest index.
template <class T>
void nn_all(const T* queries, std::size_t nq, const T* points, std::size_t np,
            std::uint32_t* out_idx, T* out_d2) {
    for (std::size_t q = 0; q < nq; ++q) {
        const T* qp = queries + q * 3;
        T best = sq_dist3(qp, points);
        std::uint32_t bi = 0;
        for (std::size_t i = 1; i < np; ++i) {
            const T d2 = sq_dist3(qp, points + i * 3);
            if (d2 < best) {
                best = d2;
                bi = std::uint32_t(i);
            }
        }
        out_idx[q] = bi;
        out_d2[q] = best;
    }
}

} // namespace serial

namespace par {

template <class T>
void matmul_bias(const T* x, std::size_t n, std::size_t ci, const T* w, std::size_t co,
                 const T* bias, T* out) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t row = 0; row < std::ptrdiff_t(n); ++row) {
        T* o = out + std::size_t(row) * co;
        for (std::size_t j = 0; j < co; ++j) o[j] = bias ? bias[j] : T(0);
        const T* xr = x + std::size_t(row) * ci;
        for (std::size_t i = 0; i < ci; ++i) {
            const T xv = xr[i];
            const T* wr = w + i * co;
            for (std::size_t j = 0; j < co; ++j) o[j] += xv * wr[j];
        }
    }
}

template <class T>
void matmul_grad_x(const T* g, std::size_t n, std::size_t co, const T* w, std::size_t ci, T* gx) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t row = 0; row < std::ptrdiff_t(n); ++row) {
        const T* gr = g + std::size_t(row) * co;
        T* o = gx + std::size_t(row) * ci;
        for (std::size_t i = 0; i < ci; ++i) {
            T acc = T(0);
            const T* wr = w + i * co;
            for (std::size_t j = 0; j < co; ++j) acc += gr[j] * wr[j];
            o[i] += acc;
        }
    }
}

template <class T>
void matmul_grad_w(const T* x, const T* g, std::size_t n, std::size_t ci, std::size_t co, T* gw) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(ci); ++i) {
        T* o = gw + std::size_t(i) * co;
        for (std::size_t row = 0; row < n; ++row) {
            const T xv = x[row * ci + std::size_t(i)];
            const T* gr = g + row * co;
            for (std::size_t j = 0; j < co; ++j) o[j] += xv * gr[j];
        }
    }
}

template <class T>
void colsum(const T* g, std::size_t n, std::size_t co, T* gb) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < std::ptrdiff_t(co); ++j) {
        T acc = T(0);
        for (std::size_t row = 0; row < n; ++row) acc += g[row * co + std::size_t(j)];
        gb[std::size_t(j)] += acc;
    }
}

// Same accumulation order as serial::conv3d_fwd, restructured so the hot
// stride-1 path runs contiguous shift-accumulate rows; parallel over output
// channels (disjoint output planes).
template <class T>
void conv3d_fwd(const T* in, std::size_t ci, std::size_t r, const T* kern, std::size_t co,
                std::size_t k, const T* bias, std::size_t stride, std::ptrdiff_t pad, T* out,
                std::size_t ro) {
    const std::size_t rvol = r * r * r;
    const std::size_t ovol = ro * ro * ro;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t occ = 0; occ < std::ptrdiff_t(co); ++occ) {
        const std::size_t oc = std::size_t(occ);
        T* oplane = out + oc * ovol;
        const T b = bias ? bias[oc] : T(0);
        for (std::size_t i = 0; i < ovol; ++i) oplane[i] = b;
        for (std::size_t ic = 0; ic < ci; ++ic) {
            const T* iplane = in + ic * rvol;
            const T* kplane = kern + (oc * ci + ic) * k * k * k;
            for (std::size_t tz = 0; tz < k; ++tz)
                for (std::size_t ty = 0; ty < k; ++ty)
                    for (std::size_t tx = 0; tx < k; ++tx) {
                        const T w = kplane[(tz * k + ty) * k + tx];
                        // valid output range for this tap
                        const auto lo = [&](std::size_t t) {
                            const std::ptrdiff_t num = pad - std::ptrdiff_t(t);
                            return std::size_t(std::max<std::ptrdiff_t>(
                                0, (num + std::ptrdiff_t(stride) - 1) / std::ptrdiff_t(stride)));
                        };
                        const auto hi = [&](std::size_t t) {
                            const std::ptrdiff_t num = std::ptrdiff_t(r) - 1 + pad - std::ptrdiff_t(t);
                            if (num < 0) return std::ptrdiff_t(-1);
                            return std::min<std::ptrdiff_t>(std::ptrdiff_t(ro) - 1,
                                                            num / std::ptrdiff_t(stride));
                        };
                        const std::size_t oz0 = lo(tz), oy0 = lo(ty), ox0 = lo(tx);
                        const std::ptrdiff_t oz1 = hi(tz), oy1 = hi(ty), ox1 = hi(tx);
                        for (std::ptrdiff_t oz = std::ptrdiff_t(oz0); oz <= oz1; ++oz) {
                            const std::size_t iz = std::size_t(oz) * stride - pad + tz;
                            for (std::ptrdiff_t oy = std::ptrdiff_t(oy0); oy <= oy1; ++oy) {
                                const std::size_t iy = std::size_t(oy) * stride - pad + ty;
                                T* orow = oplane + (std::size_t(oz) * ro + std::size_t(oy)) * ro;
                                const T* irow = iplane + (iz * r + iy) * r;
                                if (stride == 1) {
                                    const std::ptrdiff_t shift = std::ptrdiff_t(tx) - pad;
                                    for (std::ptrdiff_t ox = std::ptrdiff_t(ox0); ox <= ox1; ++ox)
                                        orow[ox] += w * irow[ox + shift];
                                } else {
                                    for (std::ptrdiff_t ox = std::ptrdiff_t(ox0); ox <= ox1; ++ox) {
                                        const std::size_t ix = std::size_t(ox) * stride - pad + tx;
                                        orow[ox] += w * irow[ix];
                                    }
                                }
                            }
                        }
                    }
        }
    }
}

template <class T>
void deconv3d_fwd(const T* in, std::size_t ci, std::size_t r, const T* kern, std::size_t co,
                  std::size_t k, const T* bias, std::size_t stride, std::ptrdiff_t pad, T* out,
                  std::size_t ro) {
    const std::size_t rvol = r * r * r;
    const std::size_t ovol = ro * ro * ro;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t occ = 0; occ < std::ptrdiff_t(co); ++occ) {
        const std::size_t oc = std::size_t(occ);
        T* oplane = out + oc * ovol;
        const T b = bias ? bias[oc] : T(0);
        for (std::size_t i = 0; i < ovol; ++i) oplane[i] = b;
        for (std::size_t ic = 0; ic < ci; ++ic) {
            const T* iplane = in + ic * rvol;
            const T* kplane = kern + (ic * co + oc) * k * k * k;
            for (std::size_t iz = 0; iz < r; ++iz)
                for (std::size_t iy = 0; iy < r; ++iy)
                    for (std::size_t ix = 0; ix < r; ++ix) {
                        const T v = iplane[(iz * r + iy) * r + ix];
                        for (std::size_t tz = 0; tz < k; ++tz) {
                            const std::ptrdiff_t oz = std::ptrdiff_t(iz * stride) - pad + std::ptrdiff_t(tz);
                            if (oz < 0 || oz >= std::ptrdiff_t(ro)) continue;
                            for (std::size_t ty = 0; ty < k; ++ty) {
                                const std::ptrdiff_t oy = std::ptrdiff_t(iy * stride) - pad + std::ptrdiff_t(ty);
                                if (oy < 0 || oy >= std::ptrdiff_t(ro)) continue;
                                T* orow = oplane + (std::size_t(oz) * ro + std::size_t(oy)) * ro;
                                const T* krow = kplane + (tz * k + ty) * k;
                                for (std::size_t tx = 0; tx < k; ++tx) {
                                    const std::ptrdiff_t ox = std::ptrdiff_t(ix * stride) - pad + std::ptrdiff_t(tx);
                                    if (ox < 0 || ox >= std::ptrdiff_t(ro)) continue;
                                    orow[ox] += v * krow[tx];
                                }
                            }
                        }
                    }
        }
    }
}

template <class T>
void conv3d_grad_kernel(const T* x, std::size_t ca, std::size_t r, const T* g, std::size_t cb,
                        std::size_t ro, std::size_t k, std::size_t stride, std::ptrdiff_t pad,
                        T* gk) {
    const std::size_t rvol = r * r * r;
    const std::size_t ovol = ro * ro * ro;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t bb = 0; bb < std::ptrdiff_t(cb); ++bb) {
        const std::size_t b = std::size_t(bb);
        const T* gplane = g + b * ovol;
        for (std::size_t a = 0; a < ca; ++a) {
            const T* xplane = x + a * rvol;
            T* gkp = gk + (b * ca + a) * k * k * k;
            for (std::size_t tz = 0; tz < k; ++tz)
                for (std::size_t ty = 0; ty < k; ++ty)
                    for (std::size_t tx = 0; tx < k; ++tx) {
                        T acc = T(0);
                        for (std::size_t oz = 0; oz < ro; ++oz) {
                            const std::ptrdiff_t iz = std::ptrdiff_t(oz * stride) - pad + std::ptrdiff_t(tz);
                            if (iz < 0 || iz >= std::ptrdiff_t(r)) continue;
                            for (std::size_t oy = 0; oy < ro; ++oy) {
                                const std::ptrdiff_t iy = std::ptrdiff_t(oy * stride) - pad + std::ptrdiff_t(ty);
                                if (iy < 0 || iy >= std::ptrdiff_t(r)) continue;
                                const T* grow = gplane + (oz * ro + oy) * ro;
                                const T* xrow = xplane + (std::size_t(iz) * r + std::size_t(iy)) * r;
                                for (std::size_t ox = 0; ox < ro; ++ox) {
                                    const std::ptrdiff_t ix = std::ptrdiff_t(ox * stride) - pad + std::ptrdiff_t(tx);
                                    if (ix < 0 || ix >= std::ptrdiff_t(r)) continue;
                                    acc += grow[ox] * xrow[std::size_t(ix)];
                                }
                            }
                        }
                        gkp[(tz * k + ty) * k + tx] += acc;
                    }
        }
    }
}

template <class T>
void channel_spatial_sum(const T* g, std::size_t c, std::size_t vol, T* gb) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ch = 0; ch < std::ptrdiff_t(c); ++ch) {
        T acc = T(0);
        const T* p = g + std::size_t(ch) * vol;
        for (std::size_t i = 0; i < vol; ++i) acc += p[i];
        gb[std::size_t(ch)] += acc;
    }
}

template <class T>
void devox_fwd(const T* grid, std::size_t c, std::size_t r, const T* coords, std::size_t n,
               T* out) {
    const std::size_t vol = r * r * r;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ptt = 0; ptt < std::ptrdiff_t(n); ++ptt) {
        const std::size_t pt = std::size_t(ptt);
        const T* p = coords + pt * 3;
        std::size_t i0[3], i1[3];
        T w1[3];
        for (int a = 0; a < 3; ++a) {
            const T u = p[a] * T(r) - T(0.5);
            const T f = std::floor(u);
            const std::ptrdiff_t base = std::ptrdiff_t(f);
            const std::ptrdiff_t rmax = std::ptrdiff_t(r) - 1;
            i0[a] = std::size_t(std::min(std::max(base, std::ptrdiff_t(0)), rmax));
            i1[a] = std::size_t(std::min(std::max(base + 1, std::ptrdiff_t(0)), rmax));
            w1[a] = u - f;
        }
        T wgt[8];
        std::size_t cell[8];
        for (int corner = 0; corner < 8; ++corner) {
            const int cz = (corner >> 2) & 1, cy = (corner >> 1) & 1, cx = corner & 1;
            const T wz = cz ? w1[2] : T(1) - w1[2];
            const T wy = cy ? w1[1] : T(1) - w1[1];
            const T wx = cx ? w1[0] : T(1) - w1[0];
            wgt[corner] = wz * wy * wx;
            const std::size_t z = cz ? i1[2] : i0[2];
            const std::size_t y = cy ? i1[1] : i0[1];
            const std::size_t x = cx ? i1[0] : i0[0];
            cell[corner] = (z * r + y) * r + x;
        }
        T* o = out + pt * c;
        for (std::size_t ch = 0; ch < c; ++ch) {
            T acc = T(0);
            const T* gp = grid + ch * vol;
            for (int corner = 0; corner < 8; ++corner) acc += wgt[corner] * gp[cell[corner]];
            o[ch] = acc;
        }
    }
}

template <class T>
void nn_all(const T* queries, std::size_t nq, const T* points, std::size_t np,
            std::uint32_t* out_idx, T* out_d2) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t q = 0; q < std::ptrdiff_t(nq); ++q) {
        const T* qp = queries + std::size_t(q) * 3;
        T best = sq_dist3(qp, points);
        std::uint32_t bi = 0;
        for (std::size_t i = 1; i < np; ++i) {
            const T d2 = sq_dist3(qp, points + i * 3);
            if (d2 < best) {
                best = d2;
                bi = std::uint32_t(i);
            }
        }
        out_idx[std::size_t(q)] = bi;
        out_d2[std::size_t(q)] = best;
    }
}

} // namespace par
} // namespace pvdc::kern
