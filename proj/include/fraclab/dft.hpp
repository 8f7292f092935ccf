#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace fraclab {

enum class DftDirection { forward, inverse };

// Unitary DFT: forward X_k = N^{-1/2} sum_j x_j e^{-2 pi i jk/N}.
std::vector<std::complex<double>> dft_1d(const std::vector<std::complex<double>>& values,
                                         DftDirection direction);

// Unitary transform applied to each column of a column-major n x cols block.
// Plans are created once; execute() is safe from several threads on distinct data.
class ColumnDft {
public:
    ColumnDft(int n, int cols);
    ~ColumnDft();
    ColumnDft(const ColumnDft&) = delete;
    ColumnDft& operator=(const ColumnDft&) = delete;

    void execute(std::complex<double>* data, DftDirection direction) const;
    int size() const { return n_; }
    int columns() const { return cols_; }

private:
    struct Plans;
    int n_, cols_;
    std::unique_ptr<Plans> plans_;
};

} // namespace fraclab
