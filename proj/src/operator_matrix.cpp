#include "bergmanlab/operator_matrix.hpp"

#include "bergmanlab/bergman_space.hpp"
#include "bergmanlab/measures.hpp"

#include <sstream>

namespace bergmanlab {

SpaceTag SpaceTag::bergman(const MultiIndexBasis& basis)
{
    SpaceTag tag;
    tag.kind = Kind::Bergman;
    tag.n = basis.dim();
    tag.degree = basis.max_degree();
    tag.dim = basis.size();
    return tag;
}

SpaceTag SpaceTag::sample(const MeasureSpec& measure)
{
    SpaceTag tag;
    tag.kind = Kind::Sample;
    tag.n = static_cast<int>(measure.dim());
    tag.dim = measure.support_size();
    tag.fingerprint = measure.fingerprint();
    return tag;
}

std::string SpaceTag::describe() const
{
    std::ostringstream out;
    if (kind == Kind::Bergman)
        out << "bergman(n=" << n << ",D=" << degree << ",size=" << dim << ",order=graded-lex)";
    else
        out << "sample(n=" << n << ",points=" << dim << ",fingerprint=" << std::hex << fingerprint << ")";
    return out.str();
}

double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

OperatorMatrix::OperatorMatrix(CMatrix entries, SpaceTag domain, SpaceTag codomain, bool hermitian)
    : entries_(std::move(entries)), domain_(std::move(domain)), codomain_(std::move(codomain)), hermitian_(hermitian)
{
    if (static_cast<std::size_t>(entries_.cols()) != domain_.dim ||
        static_cast<std::size_t>(entries_.rows()) != codomain_.dim)
        throw DomainError("OperatorMatrix: shape " + std::to_string(entries_.rows()) + "x" +
                          std::to_string(entries_.cols()) + " does not match tags " + codomain_.describe() + " <- " +
                          domain_.describe());
    if (hermitian_) {
        if (!(domain_ == codomain_))
            throw DomainError("OperatorMatrix: a Hermitian operator needs equal domain and codomain");
        const CMatrix skew = entries_ - entries_.adjoint();
        const double scale = std::max(1.0, max_abs(entries_));
        if (max_abs(skew) > 1e-12 * scale)
            throw DomainError("OperatorMatrix: matrix flagged Hermitian has |A - A*| = " +
                              std::to_string(max_abs(skew)));
        entries_ = 0.5 * (entries_ + entries_.adjoint()).eval();
    }
}

OperatorMatrix OperatorMatrix::adjoint() const
{
    return OperatorMatrix(entries_.adjoint(), codomain_, domain_, hermitian_);
}

OperatorMatrix OperatorMatrix::operator*(const OperatorMatrix& other) const
{
    if (!(other.codomain_ == domain_))
        throw DomainError("OperatorMatrix: cannot compose " + codomain_.describe() + " <- " + domain_.describe() +
                          " with " + other.codomain_.describe() + " <- " + other.domain_.describe());
    return OperatorMatrix(entries_ * other.entries_, other.domain_, codomain_);
}

OperatorMatrix OperatorMatrix::operator+(const OperatorMatrix& other) const
{
    if (!(other.domain_ == domain_) || !(other.codomain_ == codomain_))
        throw DomainError("OperatorMatrix: tag mismatch in sum");
    return OperatorMatrix(entries_ + other.entries_, domain_, codomain_);
}

OperatorMatrix OperatorMatrix::operator-(const OperatorMatrix& other) const
{
    if (!(other.domain_ == domain_) || !(other.codomain_ == codomain_))
        throw DomainError("OperatorMatrix: tag mismatch in difference");
    return OperatorMatrix(entries_ - other.entries_, domain_, codomain_);
}

} // namespace bergmanlab
