#pragma once

// Dense-matrix reference for the simulator. Every operator is materialized as
// a 2^q x 2^q matrix from Kronecker products; nothing here shares code with the
// stride-based kernels it checks.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace claqs::oracle {

using cplx = std::complex<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static Matrix identity(std::size_t dim);
  static Matrix from(std::size_t rows, std::size_t cols, std::vector<cplx> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  cplx operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<cplx>& data() const { return data_; }

  Matrix adjoint() const;
  Matrix operator*(const Matrix& rhs) const;
  Matrix operator+(const Matrix& rhs) const;
  Matrix operator*(cplx s) const;
  std::vector<cplx> operator*(std::span<const cplx> v) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<cplx> data_;
};

Matrix kron(const Matrix& a, const Matrix& b);

Matrix ry(double angle);
Matrix rx(double angle);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

/// I^{(q-1-k)} (x) G (x) I^{(k)}: G on qubit k of a little-endian register.
Matrix on_qubit(std::size_t qubits, std::size_t k, const Matrix& gate);
/// |0><0|_c (x) I + |1><1|_c (x) G_t.
Matrix controlled(std::size_t qubits, std::size_t control, std::size_t target, const Matrix& gate);

/// Ansatz-14 stack as the ordered product of its gate matrices.
Matrix ansatz(std::size_t qubits, std::size_t layers, std::span<const double> angles);

Matrix linear_combination(std::span<const cplx> coeffs, std::span<const Matrix> terms);

/// sum_k c_k M^k |0>.
std::vector<cplx> polynomial_state(std::span<const cplx> c, const Matrix& m);

/// <psi|P|psi> / <psi|psi>.
double expectation(std::span<const cplx> psi, const Matrix& op);

/// [X_0..X_{q-1}, Y_0.., Z_0..] expectations.
std::vector<double> pauli_readout(std::size_t qubits, std::span<const cplx> psi);

/// max |U^H U - I|.
double unitarity_error(const Matrix& u);

double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b);

}  // namespace claqs::oracle
