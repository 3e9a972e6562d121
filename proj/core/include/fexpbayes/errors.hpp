#pragma once

#include <stdexcept>
#include <string>

namespace fexpbayes {

struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Leading principal minor failed: covariance sequence is not positive
// definite at the reported order.
struct not_positive_definite : std::runtime_error {
    int index;
    explicit not_positive_definite(int idx)
        : std::runtime_error("covariance sequence not positive definite at order " +
                             std::to_string(idx)),
          index(idx) {}
};

// Circulant embedding stayed indefinite up to the size cap.
struct embedding_failed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct quadrature_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct not_implemented : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fexpbayes
