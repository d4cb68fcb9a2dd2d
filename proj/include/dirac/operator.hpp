#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dirac/types.hpp"

namespace dirac {

/// Label of one basis vector of an assembled operator.
struct BasisLabel {
    std::vector<int> fiberMode;   // dual-lattice multi-index xi (whole torus for flat models)
    double baseFrequency = 0.0;   // base wave number in units of 2 pi / L (mapping tori)
    int component = 0;            // index inside the block's subspace of V
};

/// One Fourier block. `frame` holds, as columns, the vectors of V spanned by the
/// block (identity for plain torus blocks).
struct OperatorBlock {
    CMatrix matrix;
    CMatrix frame;
    std::vector<BasisLabel> labels;
};

/// Hermitian operator in an exact truncated Fourier basis. Flat models make
/// every operator block-diagonal over Fourier modes, so only the blocks are
/// stored; `dense()` materializes the full matrix.
struct AssembledOperator {
    std::vector<OperatorBlock> blocks;
    int truncation = 0;
    std::string modelRef;
    /// Every eigenvalue of the untruncated operator with |lambda| below this
    /// level is present in the truncated spectrum.
    double reliableLevel = 0.0;

    Eigen::Index dimension() const;
    CMatrix dense() const;
    std::vector<BasisLabel> basisLabels() const;
    double hermitianResidual() const;
};

/// Dense export: first line "rows cols", then one row per line of
/// space-separated "re im" pairs, %.17g.
void write_dense(std::ostream& os, const AssembledOperator& op);

}  // namespace dirac
