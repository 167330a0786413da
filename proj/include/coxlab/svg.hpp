#pragma once

#include <string>

namespace coxlab {

enum class PlotKind {
    ThetaVsLambda,  // theta against lambda, linear axes
    ThetaVsNLog,    // theta against n, log10 y axis (zero rows skipped)
    RevealmentMap,  // per-block revealment heat map
};

const char* plot_kind_name(PlotKind kind);
PlotKind plot_kind_from_name(const std::string& name);  // CONFIG on unknown name

// Render a deterministic SVG for the given table text. The plot kinds read
// a theta table (ThetaVsLambda, ThetaVsNLog) or a revealment table
// (RevealmentMap); BAD_HEADER propagates from the parser. An empty table
// yields an axes-only plot. `comment_block` ("# key=value" lines) is embedded
// as an XML comment so every artifact carries its resolved config.
std::string render_plot(PlotKind kind, const std::string& table_text,
                        const std::string& comment_block);

}  // namespace coxlab
