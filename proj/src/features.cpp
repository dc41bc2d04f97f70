#include "textprop/features.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

#include "textprop/error.hpp"

namespace textprop {

Image<float> gradient_magnitude(const Raster& raster) {
  const Eigen::Index h = raster.rows();
  const Eigen::Index w = raster.cols();
  Image<float> mag(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    const Eigen::Index ym = std::max<Eigen::Index>(y - 1, 0);
    const Eigen::Index yp = std::min(y + 1, h - 1);
    for (Eigen::Index x = 0; x < w; ++x) {
      const Eigen::Index xm = std::max<Eigen::Index>(x - 1, 0);
      const Eigen::Index xp = std::min(x + 1, w - 1);
      const float gx = 0.5f * (static_cast<float>(raster(y, xp)) - raster(y, xm));
      const float gy = 0.5f * (static_cast<float>(raster(yp, x)) - raster(ym, x));
      mag(y, x) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return mag;
}

namespace {

// 1-D lower envelope of parabolas (Felzenszwalb & Huttenlocher). Every line
// passed in has at least one zero sample thanks to the padding below.
void distance_1d(const float* f, int n, float* d, std::vector<int>& v, std::vector<float>& z) {
  constexpr float kInf = std::numeric_limits<float>::infinity();
  v.resize(n);
  z.resize(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    float s = 0.0f;
    while (true) {
      const int r = v[k];
      s = ((f[q] + float(q) * q) - (f[r] + float(r) * r)) / (2.0f * float(q - r));
      if (k > 0 && s <= z[k]) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < float(q)) ++k;
    const float dq = float(q - v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

Image<float> squared_distance_transform(const Image<std::uint8_t>& mask) {
  constexpr float kFar = 1e20f;
  // Pad by one zero pixel so the array border behaves as background.
  const int h = static_cast<int>(mask.rows()) + 2;
  const int w = static_cast<int>(mask.cols()) + 2;
  Image<float> f = Image<float>::Zero(h, w);
  f.block(1, 1, mask.rows(), mask.cols()) = (mask != 0).select(Image<float>::Constant(mask.rows(), mask.cols(), kFar), 0.0f);

  std::vector<int> v;
  std::vector<float> z;
  std::vector<float> col_in(h), col_out(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col_in[y] = f(y, x);
    distance_1d(col_in.data(), h, col_out.data(), v, z);
    for (int y = 0; y < h; ++y) f(y, x) = col_out[y];
  }
  std::vector<float> row_out(w);
  for (int y = 0; y < h; ++y) {
    distance_1d(&f(y, 0), w, row_out.data(), v, z);
    for (int x = 0; x < w; ++x) f(y, x) = row_out[x];
  }
  return f.block(1, 1, mask.rows(), mask.cols());
}

double mean_stroke_width(const Image<std::uint8_t>& mask) {
  const Eigen::Index h = mask.rows();
  const Eigen::Index w = mask.cols();
  Image<std::uint8_t> fine(2 * h, 2 * w);
  for (Eigen::Index y = 0; y < 2 * h; ++y)
    for (Eigen::Index x = 0; x < 2 * w; ++x) fine(y, x) = mask(y / 2, x / 2);

  const Image<float> dist = squared_distance_transform(fine).sqrt();
  double sum = 0.0;
  std::size_t count = 0;
  for (Eigen::Index y = 0; y < 2 * h; ++y) {
    for (Eigen::Index x = 0; x < 2 * w; ++x) {
      const float d = dist(y, x);
      if (d <= 0.0f) continue;
      bool ridge = true;
      for (Eigen::Index dy = -1; dy <= 1 && ridge; ++dy) {
        for (Eigen::Index dx = -1; dx <= 1; ++dx) {
          const Eigen::Index yy = y + dy;
          const Eigen::Index xx = x + dx;
          if (yy < 0 || xx < 0 || yy >= 2 * h || xx >= 2 * w) continue;
          if (dist(yy, xx) > d) {
            ridge = false;
            break;
          }
        }
      }
      if (ridge) {
        sum += d;  // 2 * (d / 2): supersampled units back to pixels, doubled
        ++count;
      }
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double major_axis_length(const std::vector<Pixel>& pixels) {
  if (pixels.empty()) return 0.0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const Pixel& p : pixels) mean += Eigen::Vector2d(p.x, p.y);
  mean /= static_cast<double>(pixels.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const Pixel& p : pixels) {
    const Eigen::Vector2d d = Eigen::Vector2d(p.x, p.y) - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(pixels.size());
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(cov, Eigen::EigenvaluesOnly);
  const double lambda_max = std::max(solver.eigenvalues().maxCoeff(), 0.0);
  return std::sqrt(12.0 * lambda_max + 1.0);
}

RegionFeatures compute_features(const Region& region, const Raster& raster) {
  return compute_features(region, raster, gradient_magnitude(raster));
}

RegionFeatures compute_features(const Region& region, const Raster& raster,
                                const Image<float>& gradient) {
  const int width = static_cast<int>(raster.cols());
  const int height = static_cast<int>(raster.rows());
  if (region.pixels.empty()) throw ArgumentError("compute_features: empty region");
  for (const Pixel& p : region.pixels)
    if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height)
      throw ArgumentError("compute_features: region pixel outside raster");

  // Local mask with a one-pixel frame for the outer shell.
  PixelBox box{width, height, -1, -1};
  for (const Pixel& p : region.pixels) box = box_union(box, PixelBox{p.x, p.y, p.x, p.y});
  const int x0 = box.xmin - 1;
  const int y0 = box.ymin - 1;
  const int mw = box.width() + 3;
  const int mh = box.height() + 3;
  Image<std::uint8_t> mask = Image<std::uint8_t>::Zero(mh, mw);
  double intensity = 0.0;
  for (const Pixel& p : region.pixels) {
    mask(p.y - y0, p.x - x0) = 1;
    intensity += raster(p.y, p.x);
  }

  double shell_sum = 0.0;
  std::size_t shell_count = 0;
  double border_sum = 0.0;
  std::size_t border_count = 0;
  for (int my = 0; my < mh; ++my) {
    for (int mx = 0; mx < mw; ++mx) {
      const int x = mx + x0;
      const int y = my + y0;
      if (mask(my, mx)) {
        const bool border = mask(my, mx - 1) == 0 || mask(my, mx + 1) == 0 ||
                            mask(my - 1, mx) == 0 || mask(my + 1, mx) == 0;
        if (border) {
          border_sum += gradient(y, x);
          ++border_count;
        }
        continue;
      }
      if (x < 0 || y < 0 || x >= width || y >= height) continue;
      bool touches = false;
      for (int dy = -1; dy <= 1 && !touches; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = my + dy;
          const int xx = mx + dx;
          if (yy >= 0 && xx >= 0 && yy < mh && xx < mw && mask(yy, xx)) {
            touches = true;
            break;
          }
        }
      if (touches) {
        shell_sum += raster(y, x);
        ++shell_count;
      }
    }
  }

  RegionFeatures f;
  f.intensity_mean = intensity / static_cast<double>(region.pixels.size());
  // A region covering the whole raster has no shell; fall back to its own mean.
  f.boundary_intensity_mean = shell_count ? shell_sum / shell_count : f.intensity_mean;
  f.major_axis = major_axis_length(region.pixels);
  f.stroke_width_mean = mean_stroke_width(mask);
  f.border_gradient_mean = border_count ? border_sum / border_count : 0.0;
  return f;
}

}  // namespace textprop
