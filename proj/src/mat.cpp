#include "jca/mat.hpp"

namespace jca {

Mat hcat(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows()) {
        throw DimError("hcat: row mismatch " + a.shape_str() + " vs " + b.shape_str());
    }
    Mat out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
        for (std::size_t c = 0; c < b.cols(); ++c) out(r, a.cols() + c) = b(r, c);
    }
    return out;
}

Mat vcat(const Mat& a, const Mat& b) {
    if (a.cols() != b.cols()) {
        throw DimError("vcat: column mismatch " + a.shape_str() + " vs " + b.shape_str());
    }
    Mat out(a.rows() + b.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
    for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t c = 0; c < b.cols(); ++c) out(a.rows() + r, c) = b(r, c);
    return out;
}

}  // namespace jca
