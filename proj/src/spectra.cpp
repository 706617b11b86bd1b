#include "elliptic_lab/spectra.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace ell {

namespace {

bool is_real(const ComplexMatrix& a) {
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (a(i, j).imag() != 0.0) return false;
    return true;
}

void check_finite(const ComplexMatrix& a) {
    if (!a.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
}

}  // namespace

std::vector<Complex> eigenvalues(const ComplexMatrix& a) {
    check_finite(a);
    if (a.rows() != a.cols()) throw std::invalid_argument("eigenvalues: matrix must be square");
    std::vector<Complex> out(static_cast<std::size_t>(a.rows()));
    if (is_real(a)) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(a.real(), false);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("eigenvalue iteration did not converge");
        for (Eigen::Index i = 0; i < a.rows(); ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        return out;
    }
    Eigen::ComplexEigenSolver<ComplexMatrix> es(a, false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigenvalue iteration did not converge");
    for (Eigen::Index i = 0; i < a.rows(); ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return out;
}

std::vector<double> singular_values(const ComplexMatrix& a) {
    check_finite(a);
    Eigen::VectorXd sv;
    if (is_real(a)) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(a.real());
        sv = svd.singularValues();
    } else {
        Eigen::BDCSVD<ComplexMatrix> svd(a);
        sv = svd.singularValues();
    }
    std::vector<double> out(sv.data(), sv.data() + sv.size());
    std::sort(out.begin(), out.end(), std::greater<double>());
    return out;
}

SpectralData compute_spectral_data(const ComplexMatrix& a) {
    return {eigenvalues(a), singular_values(a)};
}

double esd_eval(const std::vector<Complex>& eigs, double x, double y) {
    if (eigs.empty()) return 0.0;
    std::size_t count = 0;
    for (const Complex& l : eigs)
        if (l.real() <= x && l.imag() <= y) ++count;
    return static_cast<double>(count) / static_cast<double>(eigs.size());
}

EmpiricalMeasure2D eigen_measure(const ComplexMatrix& a_scaled) {
    return {eigenvalues(a_scaled)};
}

EmpiricalMeasure1D singular_measure(const ComplexMatrix& a_scaled) {
    std::vector<double> sv = singular_values(a_scaled);
    std::sort(sv.begin(), sv.end());
    return {std::move(sv)};
}

std::pair<EmpiricalMeasure2D, EmpiricalMeasure1D> scaled_measures(const ComplexMatrix& a,
                                                                  Complex z) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(a.rows()));
    const ComplexMatrix scaled = scale * a;
    ComplexMatrix shifted = scaled;
    shifted.diagonal().array() -= z;
    return {eigen_measure(scaled), singular_measure(shifted)};
}

void write_eigenvalues_csv(const std::string& path, const std::vector<Complex>& eigs) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "re,im\n";
    f.precision(17);
    for (const Complex& l : eigs) f << l.real() << "," << l.imag() << "\n";
}

void write_singular_values_csv(const std::string& path, const std::vector<double>& sv) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "sigma\n";
    f.precision(17);
    for (double s : sv) f << s << "\n";
}

}  // namespace ell
