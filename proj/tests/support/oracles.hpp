#pragma once

// Independent reference implementations the test suites check the library
// against. These deliberately avoid the production code paths: distances are
// computed by top-down recursion straight from the definitions, IBANs are
// verified with a chunked big-number remainder, and expected hash values are
// frozen from an external SHA-256 implementation.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace oracles {

// Edit distance by naive recursion on the definition (no tables). Exponential;
// callers keep inputs tiny.
std::size_t edit_distance_naive(const std::string& a, const std::string& b);

// Edit distance by memoized recursion; independent of the iterative
// production implementation.
std::size_t edit_distance_memo(const std::string& a, const std::string& b);

// Minimum total weighted cost over all edit scripts turning ref into hyp
// (match free), by memoized recursion over the script space.
double wer_min_cost(const std::vector<std::string>& ref, const std::vector<std::string>& hyp,
                    double w_ins, double w_del, double w_sub);

// Classical WER: unit-cost distance over words divided by |ref|.
double classical_wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

// ISO 7064 check: rearranged IBAN, letters expanded to two digits, remainder
// mod 97 computed over 9-digit chunks; valid iff remainder == 1.
bool iban_mod97_valid(const std::string& iban);

// All strings over `alphabet` with length <= max_len, lexicographic.
std::vector<std::string> all_strings(const std::string& alphabet, std::size_t max_len);

} // namespace oracles
