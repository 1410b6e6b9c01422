#ifndef BCONTACT_CATALOG_HPP
#define BCONTACT_CATALOG_HPP

#include <functional>

#include "bcontact/singular.hpp"

namespace bct {

struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    std::string entry;
    std::vector<CheckOutcome> checks;
    bool all_pass = true;
};

/// A named example with its chart, form data and expected-property suite.
struct CatalogEntry {
    std::string name;
    std::string note;          // geometric provenance, in prose
    Chart chart;
    std::string form_literal;  // empty for non-form entries
    std::function<std::vector<CheckOutcome>(const GridCfg&)> run_checks;

    BForm form() const { return parse_form(form_literal, chart); }
};

std::vector<std::string> catalog_names();
const CatalogEntry& catalog_get(const std::string& name);
VerifyReport catalog_verify(const std::string& name, const GridCfg& cfg = GridCfg{});
std::vector<VerifyReport> catalog_verify_all(const GridCfg& cfg = GridCfg{});

/// The contact-form entries (name -> form) used by the cross-cutting
/// regression sweeps (Reeb back-substitution, Jacobi residuals, d^2 = 0).
std::vector<std::pair<std::string, BForm>> catalog_contact_forms();

} // namespace bct

#endif
