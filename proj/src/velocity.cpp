#include "movedg/velocity.hpp"

#include <limits>
#include <vector>

namespace movedg {

namespace {

Eigen::Vector2d zero_vec(double, const Eigen::Vector2d&) { return Eigen::Vector2d::Zero(); }
Eigen::Matrix2d zero_mat(double, const Eigen::Vector2d&) { return Eigen::Matrix2d::Zero(); }
std::array<Eigen::Matrix2d, 2> zero_mat2(double, const Eigen::Vector2d&) {
  return {Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero()};
}
std::array<Eigen::Matrix2d, 3> zero_mat3(double, const Eigen::Vector2d&) {
  return {Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero()};
}

// h(x) = (x(1-x))^2 and derivatives up to fourth order.
struct Bump {
  double h, d1, d2, d3, d4;
  explicit Bump(double x)
      : h(x * x - 2 * x * x * x + x * x * x * x),
        d1(2 * x - 6 * x * x + 4 * x * x * x),
        d2(2 - 12 * x + 12 * x * x),
        d3(-12 + 24 * x),
        d4(24) {}
};

}  // namespace

VelocityModel zero_velocity() {
  VelocityModel v;
  v.flow = zero_vec;
  v.flow_gradient = zero_mat;
  v.mesh = zero_vec;
  v.mesh_gradient = zero_mat;
  v.mesh_gradient_dx = zero_mat2;
  v.mesh_gradient_dxx = zero_mat3;
  return v;
}

VelocityModel frozen_mesh(const VelocityModel& vel) {
  VelocityModel v = vel;
  v.mesh = zero_vec;
  v.mesh_gradient = zero_mat;
  v.mesh_gradient_dx = zero_mat2;
  v.mesh_gradient_dxx = zero_mat3;
  return v;
}

VelocityModel exponential_stretch() {
  VelocityModel v = zero_velocity();
  v.mesh = [](double, const Eigen::Vector2d& x) { return Eigen::Vector2d(x.x(), 0.0); };
  v.mesh_gradient = [](double, const Eigen::Vector2d&) {
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    g(0, 0) = 1.0;
    return g;
  };
  v.flow = v.mesh;
  v.flow_gradient = v.mesh_gradient;
  return v;
}

VelocityModel rigid_rotation(double omega) {
  VelocityModel v = zero_velocity();
  v.mesh = [omega](double, const Eigen::Vector2d& x) {
    return Eigen::Vector2d(-omega * x.y(), omega * x.x());
  };
  v.mesh_gradient = [omega](double, const Eigen::Vector2d&) {
    Eigen::Matrix2d g;
    g << 0.0, -omega, omega, 0.0;
    return g;
  };
  v.flow = v.mesh;
  v.flow_gradient = v.mesh_gradient;
  return v;
}

namespace {

VelocityModel with_drift(VelocityModel v, const Eigen::Vector2d& drift) {
  v.flow = [drift, mesh = v.mesh](double t, const Eigen::Vector2d& x) {
    return drift + mesh(t, x);
  };
  v.flow_gradient = v.mesh_gradient;
  return v;
}

}  // namespace

VelocityModel vortex_literal(double amplitude, const Eigen::Vector2d& drift) {
  const double A = amplitude;
  VelocityModel v = zero_velocity();
  v.mesh = [A](double, const Eigen::Vector2d& p) {
    Bump bx(p.x()), by(p.y());
    return Eigen::Vector2d(A * by.h * bx.d1, -A * bx.h * by.d1);
  };
  v.mesh_gradient = [A](double, const Eigen::Vector2d& p) {
    Bump bx(p.x()), by(p.y());
    Eigen::Matrix2d g;
    g << A * by.h * bx.d2, A * by.d1 * bx.d1, -A * bx.d1 * by.d1, -A * bx.h * by.d2;
    return g;
  };
  v.mesh_gradient_dx = [A](double, const Eigen::Vector2d& p) {
    Bump bx(p.x()), by(p.y());
    Eigen::Matrix2d gx, gy;
    gx << A * by.h * bx.d3, A * by.d1 * bx.d2, -A * bx.d2 * by.d1, -A * bx.d1 * by.d2;
    gy << A * by.d1 * bx.d2, A * by.d2 * bx.d1, -A * bx.d1 * by.d2, -A * bx.h * by.d3;
    return std::array<Eigen::Matrix2d, 2>{gx, gy};
  };
  v.mesh_gradient_dxx = [A](double, const Eigen::Vector2d& p) {
    Bump bx(p.x()), by(p.y());
    Eigen::Matrix2d gxx, gxy, gyy;
    gxx << A * by.h * bx.d4, A * by.d1 * bx.d3, -A * bx.d3 * by.d1, -A * bx.d2 * by.d2;
    gxy << A * by.d1 * bx.d3, A * by.d2 * bx.d2, -A * bx.d2 * by.d2, -A * bx.d1 * by.d3;
    gyy << A * by.d2 * bx.d2, A * by.d3 * bx.d1, -A * bx.d1 * by.d3, -A * bx.h * by.d4;
    return std::array<Eigen::Matrix2d, 3>{gxx, gxy, gyy};
  };
  return with_drift(v, drift);
}

VelocityModel vortex_stream(double amplitude, const Eigen::Vector2d& drift) {
  const double A = amplitude;
  VelocityModel v = zero_velocity();
  v.mesh = [A](double, const Eigen::Vector2d& p) {
    Bump bx(p.x()), by(p.y());
    return Eigen::Vector2d(A * bx.h * by.d1, -A * bx.d1 * by.h);
  };
  v.mesh_gradient = [A](double, const Eigen::Vector2d& p) {
    Bump bx(p.x()), by(p.y());
    Eigen::Matrix2d g;
    g << A * bx.d1 * by.d1, A * bx.h * by.d2, -A * bx.d2 * by.h, -A * bx.d1 * by.d1;
    return g;
  };
  v.mesh_gradient_dx = [A](double, const Eigen::Vector2d& p) {
    Bump bx(p.x()), by(p.y());
    Eigen::Matrix2d gx, gy;
    gx << A * bx.d2 * by.d1, A * bx.d1 * by.d2, -A * bx.d3 * by.h, -A * bx.d2 * by.d1;
    gy << A * bx.d1 * by.d2, A * bx.h * by.d3, -A * bx.d2 * by.d1, -A * bx.d1 * by.d2;
    return std::array<Eigen::Matrix2d, 2>{gx, gy};
  };
  v.mesh_gradient_dxx = [A](double, const Eigen::Vector2d& p) {
    Bump bx(p.x()), by(p.y());
    Eigen::Matrix2d gxx, gxy, gyy;
    gxx << A * bx.d3 * by.d1, A * bx.d2 * by.d2, -A * bx.d4 * by.h, -A * bx.d3 * by.d1;
    gxy << A * bx.d2 * by.d2, A * bx.d1 * by.d3, -A * bx.d3 * by.d1, -A * bx.d2 * by.d2;
    gyy << A * bx.d1 * by.d3, A * bx.h * by.d4, -A * bx.d2 * by.d2, -A * bx.d1 * by.d3;
    return std::array<Eigen::Matrix2d, 3>{gxx, gxy, gyy};
  };
  return with_drift(v, drift);
}

VelocityCheck check_velocity(const VelocityModel& vel, const std::vector<double>& times,
                             int samples_per_side) {
  VelocityCheck out;
  out.min_reaction = std::numeric_limits<double>::infinity();
  for (double t : times) {
    for (int i = 0; i <= samples_per_side; ++i) {
      const double s = static_cast<double>(i) / samples_per_side;
      const Eigen::Vector2d pts[4] = {{s, 0.0}, {s, 1.0}, {0.0, s}, {1.0, s}};
      const Eigen::Vector2d nrm[4] = {{0, -1}, {0, 1}, {-1, 0}, {1, 0}};
      for (int k = 0; k < 4; ++k)
        out.max_boundary_normal_mesh =
            std::max(out.max_boundary_normal_mesh, std::abs(vel.mesh(t, pts[k]).dot(nrm[k])));
    }
    for (int i = 1; i < samples_per_side; ++i)
      for (int j = 1; j < samples_per_side; ++j) {
        const Eigen::Vector2d p(static_cast<double>(i) / samples_per_side,
                                static_cast<double>(j) / samples_per_side);
        out.min_reaction = std::min(out.min_reaction, vel.reaction(t, p));
      }
  }
  return out;
}

}  // namespace movedg
