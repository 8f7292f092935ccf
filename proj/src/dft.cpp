#include "fraclab/dft.hpp"

#include <cmath>
#include <cstring>
#include <mutex>

#include <fftw3.h>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {
// FFTW's planner is not re-entrant
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}
} // namespace

struct ColumnDft::Plans {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
};

ColumnDft::ColumnDft(int n, int cols) : n_(n), cols_(cols), plans_(std::make_unique<Plans>())
{
    if (n < 1 || cols < 1) throw DomainError("ColumnDft: sizes must be positive");
    std::lock_guard<std::mutex> lk(planner_mutex());
    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(n) * cols);
    int dims[1] = {n};
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans_->fwd = fftw_plan_many_dft(1, dims, cols, buf, nullptr, 1, n, buf, nullptr, 1, n,
                                     FFTW_FORWARD, flags);
    plans_->inv = fftw_plan_many_dft(1, dims, cols, buf, nullptr, 1, n, buf, nullptr, 1, n,
                                     FFTW_BACKWARD, flags);
    fftw_free(buf);
    if (!plans_->fwd || !plans_->inv) throw NumericalError("ColumnDft: FFTW planning failed");
}

ColumnDft::~ColumnDft()
{
    std::lock_guard<std::mutex> lk(planner_mutex());
    if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
    if (plans_->inv) fftw_destroy_plan(plans_->inv);
}

void ColumnDft::execute(std::complex<double>* data, DftDirection direction) const
{
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(direction == DftDirection::forward ? plans_->fwd : plans_->inv, d, d);
    const double s = 1.0 / std::sqrt(static_cast<double>(n_));
    const std::size_t total = static_cast<std::size_t>(n_) * cols_;
    for (std::size_t i = 0; i < total; ++i) data[i] *= s;
}

std::vector<std::complex<double>> dft_1d(const std::vector<std::complex<double>>& values,
                                         DftDirection direction)
{
    if (values.empty()) throw DomainError("dft_1d: empty input");
    std::vector<std::complex<double>> out(values);
    ColumnDft plan(static_cast<int>(values.size()), 1);
    plan.execute(out.data(), direction);
    return out;
}

} // namespace fraclab
