#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "elliptic_lab/anticonc.hpp"
#include "elliptic_lab/elliptic.hpp"
#include "elliptic_lab/limitlaw.hpp"
#include "elliptic_lab/lsvlab.hpp"
#include "elliptic_lab/spectra.hpp"

namespace py = pybind11;
using namespace ell;

namespace {

AtomPairSpec pair_from_kwargs(const std::string& kind, double mu, double rho) {
    if (kind == "gaussian_real") return AtomPairSpec::gaussian_real(rho);
    if (kind == "gaussian_complex") return AtomPairSpec::gaussian_complex(mu, rho);
    if (kind == "discrete_mix") return AtomPairSpec::discrete_mix(rho);
    throw std::invalid_argument("unknown pair kind: " + kind);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Correlated random matrix laboratory: condition-C0 ensembles, the elliptic "
              "law, Hermitization machinery, and anti-concentration tooling.";

    py::class_<AtomPairSpec>(m, "AtomPairSpec")
        .def(py::init(&pair_from_kwargs), py::arg("kind"), py::arg("mu") = 1.0,
             py::arg("rho") = 0.0)
        .def_readonly("mu", &AtomPairSpec::mu)
        .def_readonly("rho", &AtomPairSpec::rho)
        .def("covariance", [](const AtomPairSpec& s) { return pair_covariance(s); })
        .def("moment", &pair_moment, py::arg("i"), py::arg("j"), py::arg("l"), py::arg("m"));

    py::class_<ScalarAtomSpec>(m, "ScalarAtomSpec")
        .def_static("bernoulli", &ScalarAtomSpec::bernoulli)
        .def_static("modified_bernoulli", &ScalarAtomSpec::modified_bernoulli)
        .def_static("gaussian_real", &ScalarAtomSpec::gaussian_real);

    py::class_<PerturbationSpec>(m, "PerturbationSpec")
        .def_static("zero", &PerturbationSpec::zero)
        .def_static("low_rank", &PerturbationSpec::low_rank, py::arg("rank"),
                    py::arg("magnitude") = 1.0)
        .def_static("entry_bounded", &PerturbationSpec::entry_bounded, py::arg("alpha"));

    py::class_<EnsembleSpec>(m, "EnsembleSpec")
        .def(py::init([](int n, const AtomPairSpec& pair, std::uint64_t seed,
                         const PerturbationSpec& pert) {
                 return EnsembleSpec::make(n, pair, seed, pert);
             }),
             py::arg("n"), py::arg("pair"), py::arg("seed"),
             py::arg("perturbation") = PerturbationSpec::zero())
        .def_readonly("n", &EnsembleSpec::n)
        .def_readonly("seed", &EnsembleSpec::seed)
        .def("with_seed", &EnsembleSpec::with_seed);

    m.def("generate", &generate, py::arg("spec"), "Draw M_n = F_n + X_n for the spec.");
    m.def("hs_norm", &hs_norm);
    m.def("truncate_standardize", &truncate_standardize, py::arg("matrix"), py::arg("pair"),
          py::arg("delta"));

    m.def("eigenvalues", &eigenvalues);
    m.def("singular_values", &singular_values);
    m.def("esd_eval", &esd_eval, py::arg("eigs"), py::arg("x"), py::arg("y"));

    py::class_<EllipticLaw>(m, "EllipticLaw")
        .def(py::init<Complex>(), py::arg("rho"))
        .def("contains", &EllipticLaw::contains, py::arg("z"), py::arg("inflation") = 1.0)
        .def("cdf", &EllipticLaw::cdf, py::arg("x"), py::arg("y"))
        .def("area", &EllipticLaw::area)
        .def("density", &EllipticLaw::density)
        .def("semi_axes", &EllipticLaw::semi_axes);

    m.def(
        "discrepancy",
        [](const std::vector<Complex>& eigs, const EllipticLaw& law, int grid) {
            return discrepancy(EmpiricalMeasure2D{eigs}, law, grid);
        },
        py::arg("eigs"), py::arg("law"), py::arg("grid") = 21);
    m.def(
        "inside_fraction",
        [](const std::vector<Complex>& eigs, const EllipticLaw& law, double inflation) {
            return inside_fraction(EmpiricalMeasure2D{eigs}, law, inflation);
        },
        py::arg("eigs"), py::arg("law"), py::arg("inflation") = 1.0);

    py::class_<StieltjesState>(m, "StieltjesState")
        .def_readonly("alpha", &StieltjesState::alpha)
        .def_readonly("z", &StieltjesState::z)
        .def_readonly("s", &StieltjesState::s)
        .def_readonly("t", &StieltjesState::t)
        .def_readonly("u", &StieltjesState::u)
        .def_readonly("residual", &StieltjesState::residual);

    m.def("solve_stu_system", &solve_stu_system, py::arg("rho"), py::arg("z"),
          py::arg("alpha"));
    m.def(
        "empirical_stu",
        [](const ComplexMatrix& x, Complex z, Complex alpha) {
            const auto r = empirical_stu(x, z, alpha);
            return py::make_tuple(r.s, r.t, r.u);
        },
        py::arg("matrix"), py::arg("z"), py::arg("alpha"));
    m.def(
        "nu_z_density",
        [](double rho, Complex z, const std::vector<double>& grid, double eps) {
            const NuZ nu = nu_z_density(rho, z, grid, eps);
            return py::make_tuple(nu.grid, nu.density);
        },
        py::arg("rho"), py::arg("z"), py::arg("grid"), py::arg("epsilon") = 1e-3);
    m.def(
        "log_potential",
        [](std::vector<double> sigmas) {
            std::sort(sigmas.begin(), sigmas.end());
            return log_potential(EmpiricalMeasure1D{std::move(sigmas)});
        },
        py::arg("sigmas"));
    m.def(
        "levy_distance",
        [](std::vector<double> a, std::vector<double> b) {
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            return levy_distance(EmpiricalMeasure1D{std::move(a)},
                                 EmpiricalMeasure1D{std::move(b)});
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "moments_match",
        [](const AtomPairSpec& a, const AtomPairSpec& b, int k) {
            const auto rep = moments_match(a, b, k);
            return py::make_tuple(rep.match, rep.max_defect);
        },
        py::arg("a"), py::arg("b"), py::arg("k"));

    m.def(
        "small_ball_exact",
        [](const std::vector<Complex>& coeffs, double beta) {
            SmallBallQuery q;
            q.a = coeffs;
            q.scalar_atom = ScalarAtomSpec::bernoulli();
            q.beta = beta;
            return small_ball_exact(q).gamma;
        },
        py::arg("coeffs"), py::arg("beta"),
        "Exact sup-over-centers small-ball probability for Bernoulli atoms.");
    m.def(
        "small_ball_mc",
        [](const std::vector<Complex>& coeffs, double beta, std::size_t trials,
           std::uint64_t seed) {
            SmallBallQuery q;
            q.a = coeffs;
            q.scalar_atom = ScalarAtomSpec::bernoulli();
            q.beta = beta;
            const auto r = small_ball_mc(q, trials, seed);
            return py::make_tuple(r.gamma_hat, r.ci_lo, r.ci_hi);
        },
        py::arg("coeffs"), py::arg("beta"), py::arg("trials") = 20000, py::arg("seed") = 1);

    m.def(
        "cofactor_bilinear_identity",
        [](const ComplexMatrix& mat) {
            const auto r = cofactor_bilinear_identity(mat);
            return py::make_tuple(r.lhs, r.rhs, r.defect, r.exact_zero);
        },
        py::arg("matrix"));

    py::class_<TailReport>(m, "TailReport")
        .def_readonly("trials", &TailReport::trials)
        .def_readonly("failures", &TailReport::failures)
        .def_property_readonly("points", [](const TailReport& r) {
            py::list out;
            for (const auto& p : r.points)
                out.append(py::make_tuple(p.t, p.p, p.ci_lo, p.ci_hi));
            return out;
        });
    m.def("lsv_tail", &lsv_tail, py::arg("spec"), py::arg("thresholds"), py::arg("trials"),
          py::arg("jobs") = 0);
}
