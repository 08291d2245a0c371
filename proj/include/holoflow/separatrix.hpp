#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "holoflow/equilibria.hpp"
#include "holoflow/field.hpp"
#include "holoflow/integrate.hpp"
#include "holoflow/types.hpp"

namespace holoflow {

enum class CellLabel : std::uint8_t { InBasin, InSector, Outside, EquilibriumCell, Unresolved };

struct CellInfo {
    CellLabel label = CellLabel::Unresolved;
    std::int16_t eq = -1;
    std::int16_t sector = -1;
};

struct BasinGrid {
    Window window;
    int nx = 0, ny = 0;
    std::vector<CellInfo> cells;

    double cell_w() const { return window.width() / nx; }
    double cell_h() const { return window.height() / ny; }
    Complex cell_center(int ix, int iy) const {
        return {window.xmin + (ix + 0.5) * cell_w(), window.ymin + (iy + 0.5) * cell_h()};
    }
    const CellInfo& at(int ix, int iy) const { return cells[static_cast<std::size_t>(iy) * nx + ix]; }
    CellInfo& at(int ix, int iy) { return cells[static_cast<std::size_t>(iy) * nx + ix]; }
};

enum class Side { Positive, Negative, Double, None, Undetermined };
const char* to_string(Side s);

struct SeparatrixRecord {
    int id = -1;
    Complex seed{};
    OrbitTrace orbit;
    Side side = Side::Undetermined;
    std::optional<double> transit_time;          // double-sided: t_plus* - t_minus*
    std::optional<double> t_plus_star;           // forward blow-up time
    std::optional<double> t_minus_star;          // backward blow-up time
    bool forward_shadow = false;                 // certified from a completed excursion
    bool backward_shadow = false;
    int attached_forward = -1;                   // equilibrium the forward end converges to
    int attached_backward = -1;
    std::string note;
};

enum class ComponentType { SingleOrbit, SingleEquilibrium, EquilibriumOneOrbit, EquilibriumTwoOrbits };
const char* to_string(ComponentType t);          // "(i)".."(iv)"
const char* node_focus_tag(ComponentType t);     // "(A)"/"(B)"/"(C)"

struct PathComponent {
    ComponentType type;
    std::vector<int> record_ids;
    std::vector<int> equilibrium_ids;
};

enum class RegionKind { CenterBasin, NodeFocusBasin, EllipticSector };
const char* to_string(RegionKind k);

struct TheoremVerdict {
    std::string name;
    bool pass = false;
    double measured = 0;
    double bound = 0;
    std::string detail;
};

struct ConfigurationReport {
    Equilibrium equilibrium;
    RegionKind kind = RegionKind::NodeFocusBasin;
    int sector_index = -1;
    Window window;
    std::string field_source;
    BasinGrid grid;
    std::vector<SeparatrixRecord> records;
    std::vector<PathComponent> components;
    std::vector<TheoremVerdict> verdicts;
    int gamma1 = -1, gamma2 = -1;                // record ids, sector reports
    bool empty_boundary = false;
};

struct SeparatrixOptions {
    IntegrationControls cell;      // trimmed per-cell budget
    IntegrationControls trace;     // full budget for boundary orbits
    double dedupe_tol = 1e-5;
    double seed_spatial_tol = 1e-6;
    double shadow_refine_tol = 1e-12;  // extra bisection before tracing records
    int max_seeds = 64;
    int threads = 0;
    Window dedupe_window{-1e300, -1e300, 1e300, 1e300};  // proximity tested inside only

    SeparatrixOptions() {
        cell.t_max = 400;
        cell.max_steps = 60000;
        cell.record_samples = false;
    }
};

/// What a cell's fate means for the target equilibrium's region family.
CellInfo classify_point(const FieldExpr& f, const Equilibrium& target,
                        std::span<const Equilibrium> equilibria, Complex z,
                        const SeparatrixOptions& opt);

/// Fate grid over the window; direction of integration follows the class of
/// the target (centers forward, stable forward, unstable backward, multiple
/// both ways for the homoclinic test).
BasinGrid compute_basin(const FieldExpr& f, const Equilibrium& target,
                        std::span<const Equilibrium> equilibria, Window window,
                        int nx, int ny, const SeparatrixOptions& opt);

struct BoundarySeed {
    Complex seed;
    Complex in_point;    // bracket endpoints from the bisection
    Complex out_point;
    int sector = -1;     // which sector's boundary produced it (-1: basin)
};

struct BoundaryExtraction {
    std::vector<BoundarySeed> seeds;
    bool empty_boundary = false;
};

/// Marching over adjacent differing labels, bisection-refined to the spatial
/// tolerance. `sector` = -1 extracts the basin boundary, otherwise that
/// sector's boundary. Sets empty_boundary instead of failing when the region
/// fills the window.
BoundaryExtraction extract_boundary(const FieldExpr& f, const Equilibrium& target,
                                    std::span<const Equilibrium> equilibria,
                                    const BasinGrid& grid, int sector,
                                    const SeparatrixOptions& opt);

/// Trace every seed both ways, certify blow-ups (directly, from completed
/// excursions of shadowing orbits, or by straddle continuation along the
/// boundary), deduplicate, classify the side.
std::vector<SeparatrixRecord> trace_and_classify(const FieldExpr& f,
                                                 const Equilibrium& target,
                                                 std::span<const Equilibrium> equilibria,
                                                 std::span<const BoundarySeed> seeds,
                                                 const SeparatrixOptions& opt);

/// Boundary orbits invisible to cell marching: slits with the basin on both
/// sides, anchored at an equilibrium on the boundary (the x(x-1) node case).
/// Seeded rays around such equilibria separate into escape-direction
/// families; the family edges are the slit orbits.
std::vector<SeparatrixRecord> slit_search(const FieldExpr& f, const Equilibrium& target,
                                          std::span<const Equilibrium> equilibria,
                                          const BasinGrid& grid, const SeparatrixOptions& opt);

/// Group records and boundary equilibria into path components typed (i)-(iv).
/// Throws MalformedComponent when more than two orbits attach to one
/// equilibrium.
std::vector<PathComponent> assemble_components(std::span<const SeparatrixRecord> records,
                                               std::span<const Equilibrium> equilibria,
                                               const Equilibrium& target, const BasinGrid& grid);

/// Named checks of the three configuration theorems; failures are verdicts,
/// not errors.
std::vector<TheoremVerdict> verify_theorems(const ConfigurationReport& report);

struct SectorPair {
    int sector = -1;
    int gamma1 = -1;  // record id leaving the equilibrium (backward converges)
    int gamma2 = -1;  // record id entering it (forward converges)
};

/// Identify (or seed along the definite-direction rays and trace) the
/// incoming and outgoing boundary orbits of each sector; `only_sector`
/// restricts the work to one sector. Throws SectorSeedFailure when no
/// homoclinic cell adjoins the ray in the window.
std::vector<SectorPair> sector_pair(const FieldExpr& f, const Equilibrium& target,
                                    std::span<const Equilibrium> equilibria,
                                    const BasinGrid& grid,
                                    std::vector<SeparatrixRecord>& records,
                                    const SeparatrixOptions& opt, int only_sector = -1);

struct HeteroclinicProbe {
    bool hetero_cells_found = false;
    std::vector<SeparatrixRecord> records;
    std::string note;
};

/// Experimental transit-time/blow-up measurements on the boundary orbits of
/// the heteroclinic region between two equilibria (or of the direct interface
/// between their regions when no heteroclinic cells exist). Reports outcomes
/// without asserting the conjecture.
HeteroclinicProbe heteroclinic_region_probe(const FieldExpr& f,
                                            std::span<const Equilibrium> equilibria,
                                            int id_a, int id_b, Window window, int nx, int ny,
                                            const SeparatrixOptions& opt);

/// Spatial distance from a point to a record's sampled polyline, restricted
/// to samples inside the window.
double distance_to_polyline(Complex p, const OrbitTrace& trace, const Window& window);

/// Symmetric Hausdorff distance between sampled polylines inside the window.
double sampled_hausdorff(const OrbitTrace& a, const OrbitTrace& b, const Window& window);

}  // namespace holoflow
