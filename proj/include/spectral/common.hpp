#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spectral {

using cplx = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using RowC = Eigen::RowVectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class AccuracyError : public Error {
public:
    using Error::Error;
};

class StabilityError : public Error {
public:
    using Error::Error;
};

class TypeError : public Error {
public:
    using Error::Error;
};

class SingularError : public Error {
public:
    using Error::Error;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};

// Principal square root of -z, the branch used for decaying free solutions.
inline cplx sqrt_neg(cplx z) { return std::sqrt(-z); }

}  // namespace spectral
