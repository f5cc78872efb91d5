#include "oracle.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace claqs::oracle {

Matrix Matrix::identity(std::size_t dim) {
  Matrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from(std::size_t rows, std::size_t cols, std::vector<cplx> data) {
  if (data.size() != rows * cols) throw Error(ErrorKind::Dimension, "matrix data size mismatch");
  Matrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.data_ = std::move(data);
  return m;
}

Matrix Matrix::adjoint() const {
  Matrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  if (cols_ != rhs.rows_) throw Error(ErrorKind::Dimension, "matrix product shape mismatch");
  Matrix out(rows_, rhs.cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = 0; k < cols_; ++k) {
      const cplx a = (*this)(r, k);
      if (a == cplx{}) continue;
      for (std::size_t c = 0; c < rhs.cols_; ++c) out(r, c) += a * rhs(k, c);
    }
  return out;
}

Matrix Matrix::operator+(const Matrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw Error(ErrorKind::Dimension, "matrix sum shape mismatch");
  Matrix out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
  return out;
}

Matrix Matrix::operator*(cplx s) const {
  Matrix out = *this;
  for (auto& v : out.data_) v *= s;
  return out;
}

std::vector<cplx> Matrix::operator*(std::span<const cplx> v) const {
  if (v.size() != cols_) throw Error(ErrorKind::Dimension, "matrix-vector shape mismatch");
  std::vector<cplx> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out[r] += (*this)(r, c) * v[c];
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ar = 0; ar < a.rows(); ++ar)
    for (std::size_t ac = 0; ac < a.cols(); ++ac)
      for (std::size_t br = 0; br < b.rows(); ++br)
        for (std::size_t bc = 0; bc < b.cols(); ++bc)
          out(ar * b.rows() + br, ac * b.cols() + bc) = a(ar, ac) * b(br, bc);
  return out;
}

Matrix ry(double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  return Matrix::from(2, 2, {c, -s, s, c});
}

Matrix rx(double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  return Matrix::from(2, 2, {c, cplx(0, -s), cplx(0, -s), c});
}

Matrix pauli_x() { return Matrix::from(2, 2, {0, 1, 1, 0}); }
Matrix pauli_y() { return Matrix::from(2, 2, {0, cplx(0, -1), cplx(0, 1), 0}); }
Matrix pauli_z() { return Matrix::from(2, 2, {1, 0, 0, -1}); }

Matrix on_qubit(std::size_t qubits, std::size_t k, const Matrix& gate) {
  // Leftmost Kronecker factor is the most significant qubit.
  Matrix out = Matrix::identity(1);
  for (std::size_t wire = qubits; wire-- > 0;) {
    out = kron(out, wire == k ? gate : Matrix::identity(2));
  }
  return out;
}

Matrix controlled(std::size_t qubits, std::size_t control, std::size_t target,
                  const Matrix& gate) {
  const Matrix p0 = Matrix::from(2, 2, {1, 0, 0, 0});
  const Matrix p1 = Matrix::from(2, 2, {0, 0, 0, 1});
  Matrix idle = Matrix::identity(1), active = Matrix::identity(1);
  for (std::size_t wire = qubits; wire-- > 0;) {
    const Matrix id = Matrix::identity(2);
    idle = kron(idle, wire == control ? p0 : id);
    active = kron(active, wire == control ? p1 : (wire == target ? gate : id));
  }
  return idle + active;
}

Matrix ansatz(std::size_t qubits, std::size_t layers, std::span<const double> angles) {
  const std::size_t q = qubits;
  if (angles.size() != 4 * layers * q) throw Error(ErrorKind::Shape, "oracle ansatz angle count");
  Matrix u = Matrix::identity(std::size_t{1} << q);
  auto then = [&](const Matrix& g) { u = g * u; };
  std::size_t a = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const double* block = angles.data() + 4 * q * l;
    for (std::size_t i = 0; i < q; ++i) then(on_qubit(q, i, ry(block[i])));
    for (std::size_t i = q; i-- > 0;) then(controlled(q, i, (i + 1) % q, rx(block[q + i])));
    for (std::size_t i = 0; i < q; ++i) then(on_qubit(q, i, ry(block[2 * q + i])));
    for (std::size_t i = 0; i < q; ++i) then(controlled(q, i, (i + q - 1) % q, rx(block[3 * q + i])));
    a += 4 * q;
  }
  return u;
}

Matrix linear_combination(std::span<const cplx> coeffs, std::span<const Matrix> terms) {
  if (coeffs.size() != terms.size() || terms.empty()) {
    throw Error(ErrorKind::Arity, "oracle linear combination arity");
  }
  Matrix out(terms[0].rows(), terms[0].cols());
  for (std::size_t j = 0; j < terms.size(); ++j) out = out + terms[j] * coeffs[j];
  return out;
}

std::vector<cplx> polynomial_state(std::span<const cplx> c, const Matrix& m) {
  const std::size_t dim = m.rows();
  Matrix power = Matrix::identity(dim);
  Matrix total(dim, dim);
  for (std::size_t k = 0; k < c.size(); ++k) {
    total = total + power * c[k];
    power = m * power;
  }
  std::vector<cplx> e0(dim);
  e0[0] = 1.0;
  return total * std::span<const cplx>(e0);
}

double expectation(std::span<const cplx> psi, const Matrix& op) {
  const auto p = op * psi;
  cplx num{};
  double den = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    num += std::conj(psi[i]) * p[i];
    den += std::norm(psi[i]);
  }
  return num.real() / den;
}

std::vector<double> pauli_readout(std::size_t qubits, std::span<const cplx> psi) {
  std::vector<double> out(3 * qubits);
  const Matrix paulis[3] = {pauli_x(), pauli_y(), pauli_z()};
  for (std::size_t axis = 0; axis < 3; ++axis)
    for (std::size_t k = 0; k < qubits; ++k)
      out[axis * qubits + k] = expectation(psi, on_qubit(qubits, k, paulis[axis]));
  return out;
}

double unitarity_error(const Matrix& u) {
  const Matrix g = u.adjoint() * u;
  double err = 0.0;
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c)
      err = std::max(err, std::abs(g(r, c) - (r == c ? cplx(1.0) : cplx{})));
  return err;
}

double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::Dimension, "max_abs_diff length mismatch");
  double err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
  return err;
}

}  // namespace claqs::oracle
