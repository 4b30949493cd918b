#pragma once

#include <stdexcept>
#include <string>

namespace codesign {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Element payload does not match the poset it is used with.
class invalid_element : public error {
public:
    using error::error;
};

// A set has no least upper (or greatest lower) bound.
class no_join : public error {
public:
    using error::error;
};

// Caller broke a documented precondition.
class contract_violation : public error {
public:
    using error::error;
};

// Implementation outside the space of a design problem.
class domain_error : public error {
public:
    using error::error;
};

// Missing or inconsistent configuration (evaluator structure, config file).
class configuration_error : public error {
public:
    using error::error;
};

class duplicate_record : public error {
public:
    using error::error;
};

// Observations inconsistent with the assumed linear model.
class misspecification_error : public error {
public:
    using error::error;
};

class parse_error : public error {
public:
    using error::error;
};

// Bug signal: an invariant that should hold by construction did not.
class internal_error : public error {
public:
    using error::error;
};

}  // namespace codesign
