#pragma once

#include "bergmanlab/types.hpp"

#include <cstddef>
#include <cstdint>
#include <string>

namespace bergmanlab {

class MultiIndexBasis;
class MeasureSpec;

/// Which space a matrix acts on: coefficients in a truncated Bergman basis, or the weighted
/// sample space of a measure (values at support points scaled by sqrt(weight)).
struct SpaceTag {
    enum class Kind { Bergman, Sample };

    Kind kind = Kind::Bergman;
    int n = 0;
    int degree = 0;
    std::size_t dim = 0;
    std::uint64_t fingerprint = 0;  // identifies the measure for Sample tags

    static SpaceTag bergman(const MultiIndexBasis& basis);
    static SpaceTag sample(const MeasureSpec& measure);

    std::string describe() const;
    bool operator==(const SpaceTag&) const = default;
};

class OperatorMatrix {
public:
    OperatorMatrix(CMatrix entries, SpaceTag domain, SpaceTag codomain, bool hermitian = false);

    /// Square operator on a single space.
    static OperatorMatrix on(CMatrix entries, const SpaceTag& space, bool hermitian = false)
    {
        return OperatorMatrix(std::move(entries), space, space, hermitian);
    }

    const CMatrix& entries() const { return entries_; }
    const SpaceTag& domain() const { return domain_; }
    const SpaceTag& codomain() const { return codomain_; }
    bool hermitian() const { return hermitian_; }
    Eigen::Index rows() const { return entries_.rows(); }
    Eigen::Index cols() const { return entries_.cols(); }

    OperatorMatrix adjoint() const;

    /// Composition this * other; requires other.codomain() == this->domain().
    OperatorMatrix operator*(const OperatorMatrix& other) const;
    OperatorMatrix operator+(const OperatorMatrix& other) const;
    OperatorMatrix operator-(const OperatorMatrix& other) const;

private:
    CMatrix entries_;
    SpaceTag domain_;
    SpaceTag codomain_;
    bool hermitian_;
};

/// Largest entry modulus.
double max_abs(const CMatrix& a);

} // namespace bergmanlab
