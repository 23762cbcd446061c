#include "osmm/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace osmm {

bool Box::contains(const Vector& x, double tol) const {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) < lower(i) - tol || x(i) > upper(i) + tol) return false;
  }
  return true;
}

Bundle::Bundle(Eigen::Index memory, double rho, std::optional<Box> box, std::optional<double> floor)
    : memory_(memory), rho_(rho), box_(std::move(box)), floor_(floor) {
  if (memory_ < 1) throw Error(ErrorCode::InvalidArgument, "bundle memory must be >= 1");
  if (rho_ < 0.0) throw Error(ErrorCode::InvalidArgument, "strong convexity must be >= 0");
}

void Bundle::push(BundlePiece piece) {
  if (!std::isfinite(piece.value) || !piece.gradient.allFinite() || !piece.anchor.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "bundle piece must be finite");
  }
  if (!pieces_.empty() && piece.anchor.size() != pieces_.front().anchor.size()) {
    throw Error(ErrorCode::DimensionMismatch, "bundle piece dimension changed");
  }
  pieces_.push_back(std::move(piece));
  while (static_cast<Eigen::Index>(pieces_.size()) > memory_) pieces_.pop_front();
}

double Bundle::piece_value(std::size_t i, const Vector& x) const {
  const BundlePiece& p = pieces_.at(i);
  const Vector d = x - p.anchor;
  double v = p.value + p.gradient.dot(d);
  if (rho_ > 0.0) v += 0.5 * rho_ * d.squaredNorm();
  return v;
}

Vector Bundle::piece_gradient(std::size_t i, const Vector& x) const {
  const BundlePiece& p = pieces_.at(i);
  if (rho_ > 0.0) return p.gradient + rho_ * (x - p.anchor);
  return p.gradient;
}

double Bundle::eval(const Vector& x) const {
  if (pieces_.empty()) throw Error(ErrorCode::EmptyBundle, "eval on empty bundle");
  if (box_ && !box_->contains(x)) return std::numeric_limits<double>::infinity();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pieces_.size(); ++i) best = std::max(best, piece_value(i, x));
  if (floor_) best = std::max(best, *floor_);
  return best;
}

EpigraphRows Bundle::epigraph_rows() const {
  if (pieces_.empty()) throw Error(ErrorCode::EmptyBundle, "epigraph_rows on empty bundle");
  const Eigen::Index n = pieces_.front().anchor.size();
  const Eigen::Index rows = static_cast<Eigen::Index>(pieces_.size()) + (floor_ ? 1 : 0);
  EpigraphRows out;
  out.slopes = Matrix::Zero(rows, n);
  out.offsets = Vector::Zero(rows);
  out.rho = rho_;
  out.has_floor = floor_.has_value();
  out.box = box_;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const BundlePiece& p = pieces_[i];
    const auto r = static_cast<Eigen::Index>(i);
    out.slopes.row(r) = (p.gradient - rho_ * p.anchor).transpose();
    out.offsets(r) = p.value - p.gradient.dot(p.anchor) + 0.5 * rho_ * p.anchor.squaredNorm();
  }
  if (floor_) out.offsets(rows - 1) = *floor_;
  return out;
}

}  // namespace osmm
