#include "lqmfg/matrix_path.hpp"

#include <algorithm>
#include <stdexcept>

namespace lqmfg {

MatrixPath::MatrixPath(std::vector<double> nodes, std::vector<Eigen::MatrixXd> values,
                       std::vector<Eigen::MatrixXd> derivatives)
    : nodes_(std::move(nodes)), values_(std::move(values)), derivs_(std::move(derivatives))
{
    assert(nodes_.size() == values_.size() && nodes_.size() == derivs_.size());
    assert(nodes_.size() >= 2);
    for (size_t k = 1; k < nodes_.size(); ++k) assert(nodes_[k] > nodes_[k - 1]);
}

MatrixPath MatrixPath::constant(double t0, double t1, const Eigen::MatrixXd& v)
{
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(v.rows(), v.cols());
    return MatrixPath({t0, t1}, {v, v}, {zero, zero});
}

int MatrixPath::locate(double t) const
{
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    int k = (int)(it - nodes_.begin()) - 1;
    return std::clamp(k, 0, (int)nodes_.size() - 2);
}

Eigen::MatrixXd MatrixPath::eval(double t) const
{
    const double span = nodes_.back() - nodes_.front();
    if (t < nodes_.front() - 1e-9 * span || t > nodes_.back() + 1e-9 * span)
        throw std::out_of_range("MatrixPath::eval: t outside path domain");
    t = std::clamp(t, nodes_.front(), nodes_.back());

    const int k = locate(t);
    const double h = nodes_[k + 1] - nodes_[k];
    const double s = (t - nodes_[k]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * values_[k] + (h10 * h) * derivs_[k] + h01 * values_[k + 1] +
           (h11 * h) * derivs_[k + 1];
}

double MatrixPath::max_norm() const
{
    double m = 0;
    for (const auto& v : values_) m = std::max(m, v.norm());
    return m;
}

}  // namespace lqmfg
