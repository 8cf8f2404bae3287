#pragma once

#include "bases.hpp"
#include "circuit.hpp"
#include "formula.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace exsyn
{

using node_id = gate_graph::node_id;

enum class topology_mode
{
  circuit,
  boolean_function,
  network
};

inline std::string to_string( topology_mode m )
{
  switch ( m )
  {
  case topology_mode::circuit:
    return "circuit";
  case topology_mode::boolean_function:
    return "boolean-function";
  default:
    return "network";
  }
}

inline topology_mode parse_topology_mode( std::string const& s )
{
  if ( s == "circuit" )
    return topology_mode::circuit;
  if ( s == "boolean-function" || s == "boolean_function" || s == "function" )
    return topology_mode::boolean_function;
  if ( s == "network" )
    return topology_mode::network;
  throw std::invalid_argument( "unknown topology mode '" + s + "'" );
}

/*! \brief Variable supply and side constraints collected while an encoding is built. */
struct encoding_context
{
  gate_graph g;
  var last_var{0};
  std::vector<var> S;
  std::vector<var> X;
  std::vector<node_id> constraints;

  var fresh_var() { return ++last_var; }

  node_id fresh_selector()
  {
    auto const v = fresh_var();
    S.push_back( v );
    return g.variable( v );
  }

  node_id fresh_input()
  {
    auto const v = fresh_var();
    X.push_back( v );
    return g.variable( v );
  }

  /*! \brief Conjoins the constraints with `extra` and installs the result as root. */
  node_id finish( std::vector<node_id> extra = {} )
  {
    extra.insert( extra.end(), constraints.begin(), constraints.end() );
    auto const r = g.make_and( extra );
    g.set_root( r );
    return r;
  }
};

namespace detail
{

inline bool column_matches( boolean_function const& f, uint32_t out, std::function<bool( uint64_t )> const& pred )
{
  for ( uint64_t r = 0; r < f.num_rows(); ++r )
  {
    if ( f.get( r, out ) != pred( r ) )
      return false;
  }
  return true;
}

} // namespace detail

/*! \brief Gate-graph realization of output `out` of `f` over the first f.num_inputs() wires.
 *
 * Common connectives map to native nodes; anything else is built by Shannon
 * expansion on input 0, 1, ... with constant leaves, which folds as it goes.
 */
inline node_id build_function( gate_graph& g, boolean_function const& f, uint32_t out, std::vector<node_id> const& in )
{
  auto const m = f.num_inputs();
  if ( in.size() < m )
    throw std::invalid_argument( "function " + f.name() + " needs " + std::to_string( m ) + " inputs" );
  std::vector<node_id> args( in.begin(), in.begin() + m );
  auto const rows = f.num_rows();
  auto popcount = []( uint64_t r ) { return static_cast<uint32_t>( __builtin_popcountll( r ) ); };
  if ( m == 0u )
    return g.constant( f.get( 0, out ) );
  if ( m == 1u )
  {
    auto const a = f.get( 0, out ), b = f.get( 1, out );
    if ( a == b )
      return g.constant( a );
    return b ? args[0] : g.make_not( args[0] );
  }
  if ( detail::column_matches( f, out, [&]( uint64_t r ) { return r == rows - 1u; } ) )
    return g.make_and( args );
  if ( detail::column_matches( f, out, [&]( uint64_t r ) { return r != rows - 1u; } ) )
    return g.make_not( g.make_and( args ) );
  if ( detail::column_matches( f, out, [&]( uint64_t r ) { return r != 0u; } ) )
    return g.make_or( args );
  if ( detail::column_matches( f, out, [&]( uint64_t r ) { return r == 0u; } ) )
    return g.make_not( g.make_or( args ) );
  if ( detail::column_matches( f, out, [&]( uint64_t r ) { return popcount( r ) & 1u; } ) )
  {
    auto acc = args[0];
    for ( auto i = 1u; i < m; ++i )
      acc = g.make_xor( acc, args[i] );
    return acc;
  }
  if ( detail::column_matches( f, out, [&]( uint64_t r ) { return !( popcount( r ) & 1u ); } ) )
  {
    auto acc = args[0];
    for ( auto i = 1u; i < m; ++i )
      acc = g.make_xor( acc, args[i] );
    return g.make_not( acc );
  }
  std::function<node_id( uint32_t, uint64_t )> rec = [&]( uint32_t depth, uint64_t prefix ) -> node_id {
    if ( depth == m )
      return g.constant( f.get( prefix, out ) );
    auto const hi = rec( depth + 1u, ( prefix << 1 ) | 1u );
    auto const lo = rec( depth + 1u, prefix << 1 );
    return g.make_mux( args[depth], hi, lo );
  };
  return rec( 0u, 0u );
}

/*! \brief Gate-graph nodes for every output port of a circuit, given nodes for its inputs (in input order). */
inline std::vector<node_id> circuit_to_graph( gate_graph& g, circuit const& c, std::vector<node_id> const& inputs )
{
  if ( inputs.size() != c.num_inputs() )
    throw std::invalid_argument( "wrong number of input nodes" );
  std::vector<std::vector<node_id>> val( c.num_nodes() );
  for ( auto i = 0u; i < c.num_inputs(); ++i )
    val[c.inputs()[i]] = {inputs[i]};
  for ( auto n : c.topological_order() )
  {
    auto const& nd = c.node( n );
    if ( !nd.fn )
      continue;
    std::vector<node_id> in;
    for ( auto const& s : c.fanins( n ) )
      in.push_back( val[s.node].at( s.index ) );
    for ( auto o = 0u; o < nd.fn->num_outputs(); ++o )
      val[n].push_back( build_function( g, *nd.fn, o, in ) );
  }
  std::vector<node_id> outs;
  for ( auto const& o : c.outputs() )
    outs.push_back( val[o.driver.node].at( o.driver.index ) );
  return outs;
}

/*! \brief Conjunction of selector literals that holds iff the selectors spell `code` (MSB first). */
inline node_id selector_equals( gate_graph& g, std::vector<node_id> const& selectors, uint64_t code )
{
  auto const w = static_cast<uint32_t>( selectors.size() );
  std::vector<node_id> lits;
  for ( auto b = 0u; b < w; ++b )
  {
    bool const bit = ( code >> ( w - 1u - b ) ) & 1u;
    lits.push_back( bit ? selectors[b] : g.make_not( selectors[b] ) );
  }
  return g.make_and( lits );
}

struct multiplexer
{
  node_id output{0};
  std::vector<node_id> terms;     /* one AND per data wire */
  std::vector<node_id> inverters; /* one NOT per selector */
  std::optional<node_id> disjunction;
};

/*! \brief n-way multiplexer: n AND terms over the data wire and selector literals, |S| inverters, one OR. */
inline multiplexer build_multiplexer( gate_graph& g, std::vector<node_id> const& data, std::vector<node_id> const& selectors )
{
  auto const n = static_cast<uint32_t>( data.size() );
  if ( n == 0u )
    throw std::invalid_argument( "multiplexer needs at least one data wire" );
  auto const w = selector_width( n );
  if ( selectors.size() != w )
    throw std::invalid_argument( "multiplexer over " + std::to_string( n ) + " wires needs " + std::to_string( w ) + " selectors" );
  multiplexer mx;
  if ( n == 1u )
  {
    mx.output = data[0];
    return mx;
  }
  for ( auto s : selectors )
    mx.inverters.push_back( g.make_not( s ) );
  for ( auto c = 0u; c < n; ++c )
  {
    std::vector<node_id> lits{data[c]};
    for ( auto b = 0u; b < w; ++b )
    {
      bool const bit = ( c >> ( w - 1u - b ) ) & 1u;
      lits.push_back( bit ? selectors[b] : mx.inverters[b] );
    }
    mx.terms.push_back( g.make_and( lits ) );
  }
  mx.output = g.make_or( mx.terms );
  mx.disjunction = mx.output;
  return mx;
}

/*! \brief Configurable component: selector code c realizes basis function functions[c]. */
struct universal_cell
{
  std::vector<uint32_t> functions; /* code -> basis index */
  std::vector<var> selectors;      /* MSB first */
  std::vector<node_id> selector_nodes;
  std::vector<node_id> inputs;
  std::vector<node_id> outputs;
  std::vector<node_id> decoders; /* per code: selectors spell the code (depends on S only) */
  node_id valid{0};              /* no invalid code is selected */
  uint32_t width_in{0};
  uint32_t width_out{0};
};

/*! \brief Builds a universal cell over `inputs` choosing among `candidates` (all of b when empty).
 *
 * Functions narrower than the cell read its first inputs; output positions a
 * function lacks are driven by constant 0.  The validity constraint (one
 * clause per invalid code) is added to the context.
 */
inline universal_cell build_universal_cell( encoding_context& ctx, basis const& b, std::vector<node_id> inputs,
                                            std::vector<uint32_t> candidates = {} )
{
  auto& g = ctx.g;
  universal_cell cell;
  if ( candidates.empty() )
  {
    for ( auto i = 0u; i < b.size(); ++i )
      candidates.push_back( i );
  }
  cell.functions = candidates;
  for ( auto c : candidates )
  {
    auto const& f = b.functions.at( c );
    cell.width_in = std::max( cell.width_in, f.num_inputs() );
    cell.width_out = std::max( cell.width_out, f.num_outputs() );
  }
  if ( inputs.empty() )
  {
    for ( auto i = 0u; i < cell.width_in; ++i )
      inputs.push_back( ctx.fresh_input() );
  }
  if ( inputs.size() < cell.width_in )
    throw std::invalid_argument( "universal cell needs " + std::to_string( cell.width_in ) + " input wires" );
  inputs.resize( cell.width_in );
  cell.inputs = inputs;

  auto const n = static_cast<uint32_t>( candidates.size() );
  auto const w = selector_width( n );
  for ( auto i = 0u; i < w; ++i )
  {
    cell.selector_nodes.push_back( ctx.fresh_selector() );
    cell.selectors.push_back( ctx.S.back() );
  }
  for ( auto c = 0u; c < n; ++c )
    cell.decoders.push_back( selector_equals( g, cell.selector_nodes, c ) );

  for ( auto p = 0u; p < cell.width_out; ++p )
  {
    std::vector<node_id> data;
    for ( auto c : candidates )
    {
      auto const& f = b.functions[c];
      data.push_back( p < f.num_outputs() ? build_function( g, f, p, inputs ) : g.constant( false ) );
    }
    cell.outputs.push_back( build_multiplexer( g, data, cell.selector_nodes ).output );
  }

  std::vector<node_id> blocks;
  for ( uint64_t c = n; c < ( uint64_t( 1 ) << w ); ++c )
    blocks.push_back( g.make_not( selector_equals( g, cell.selector_nodes, c ) ) );
  cell.valid = g.make_and( blocks );
  if ( !g.is_const( cell.valid ) )
    ctx.constraints.push_back( cell.valid );
  return cell;
}

/*! \brief Code spelled by the cell's selectors under an assignment. */
inline uint64_t decode_code( universal_cell const& cell, std::function<bool( var )> const& value )
{
  uint64_t code = 0;
  for ( auto v : cell.selectors )
    code = ( code << 1 ) | ( value( v ) ? 1u : 0u );
  return code;
}

struct source_ref
{
  enum class kind : uint8_t
  {
    input,
    ancilla,
    cell
  };
  kind type{kind::input};
  uint32_t index{0};
  uint32_t pos{0};
};

struct sink_ref
{
  enum class kind : uint8_t
  {
    cell,
    output,
    garbage
  };
  kind type{kind::cell};
  uint32_t index{0};
  uint32_t pos{0};
};

inline std::string describe( source_ref const& s, std::vector<std::string> const& input_names )
{
  switch ( s.type )
  {
  case source_ref::kind::input:
    return "input " + input_names.at( s.index );
  case source_ref::kind::ancilla:
    return "ancilla " + std::to_string( s.index );
  default:
    return "cell " + std::to_string( s.index ) + " output " + std::to_string( s.pos );
  }
}

inline std::string describe( sink_ref const& s, std::vector<std::string> const& output_names )
{
  switch ( s.type )
  {
  case sink_ref::kind::cell:
    return "cell " + std::to_string( s.index ) + " input " + std::to_string( s.pos );
  case sink_ref::kind::output:
    return "output " + output_names.at( s.index );
  default:
    return "garbage";
  }
}

/*! \brief Interconnection fabric: selector s_{i,j} connects source i to sink j.
 *
 * Entries forbidden by cycle breaking do not exist at all (cell i only sees
 * primary inputs, ancillae and cells below i).
 */
struct fabric
{
  topology_mode mode{topology_mode::circuit};
  std::vector<source_ref> sources;
  std::vector<sink_ref> sinks;
  std::vector<std::vector<std::pair<uint32_t, var>>> rows; /* per sink: (source, selector) */
  std::vector<node_id> source_value;
  std::vector<node_id> sink_value;
  std::vector<universal_cell> cells;
  std::vector<node_id> ancilla_value;
  /* set by add_uucp: sink exempt from its row, source absent from its column */
  std::vector<std::optional<node_id>> sink_exempt;
  std::vector<std::optional<node_id>> source_absent;

  std::vector<std::vector<std::pair<uint32_t, var>>> columns() const
  {
    std::vector<std::vector<std::pair<uint32_t, var>>> cols( sources.size() );
    for ( auto j = 0u; j < rows.size(); ++j )
      for ( auto const& [i, v] : rows[j] )
        cols[i].emplace_back( j, v );
    return cols;
  }

  uint32_t num_selectors() const
  {
    uint32_t n = 0;
    for ( auto const& r : rows )
      n += static_cast<uint32_t>( r.size() );
    return n;
  }
};

/*! \brief Builds k universal cells and the fabric wiring them to the primary inputs/outputs.
 *
 * Sinks are listed cell inputs first (cell by cell), then primary outputs,
 * then (network mode only) one garbage sink that collects unused wires.
 */
inline fabric build_fabric( encoding_context& ctx, uint32_t k, std::vector<node_id> const& inputs, uint32_t num_outputs,
                            basis const& b, topology_mode mode, std::vector<node_id> const& ancillas = {} )
{
  if ( k == 0u )
    throw std::invalid_argument( "fabric needs at least one cell" );
  auto& g = ctx.g;
  fabric fab;
  fab.mode = mode;
  fab.ancilla_value = ancillas;
  for ( auto i = 0u; i < inputs.size(); ++i )
  {
    fab.sources.push_back( {source_ref::kind::input, i, 0u} );
    fab.source_value.push_back( inputs[i] );
  }
  for ( auto i = 0u; i < ancillas.size(); ++i )
  {
    fab.sources.push_back( {source_ref::kind::ancilla, i, 0u} );
    fab.source_value.push_back( ancillas[i] );
  }
  uint32_t width_in = 0, width_out = 0;
  for ( auto const& f : b.functions )
  {
    width_in = std::max( width_in, f.num_inputs() );
    width_out = std::max( width_out, f.num_outputs() );
  }

  auto add_sink = [&]( sink_ref s, uint32_t visible_sources ) {
    std::vector<std::pair<uint32_t, var>> row;
    std::vector<node_id> terms;
    for ( auto i = 0u; i < visible_sources; ++i )
    {
      auto const v = ctx.fresh_selector();
      row.emplace_back( i, ctx.S.back() );
      terms.push_back( g.make_and( v, fab.source_value[i] ) );
    }
    fab.sinks.push_back( s );
    fab.rows.push_back( std::move( row ) );
    fab.sink_value.push_back( g.make_or( terms ) );
    return fab.sink_value.back();
  };

  for ( auto c = 0u; c < k; ++c )
  {
    auto const visible = static_cast<uint32_t>( fab.sources.size() );
    std::vector<node_id> cell_in;
    for ( auto p = 0u; p < width_in; ++p )
      cell_in.push_back( add_sink( {sink_ref::kind::cell, c, p}, visible ) );
    auto cell = build_universal_cell( ctx, b, cell_in );
    for ( auto p = 0u; p < cell.width_out; ++p )
    {
      fab.sources.push_back( {source_ref::kind::cell, c, p} );
      fab.source_value.push_back( cell.outputs[p] );
    }
    fab.cells.push_back( std::move( cell ) );
  }
  auto const all = static_cast<uint32_t>( fab.sources.size() );
  for ( auto o = 0u; o < num_outputs; ++o )
    add_sink( {sink_ref::kind::output, o, 0u}, all );
  if ( mode == topology_mode::network )
    add_sink( {sink_ref::kind::garbage, 0u, 0u}, all );
  fab.sink_exempt.assign( fab.sinks.size(), std::nullopt );
  fab.source_absent.assign( fab.sources.size(), std::nullopt );
  return fab;
}

/*! \brief Neutralizes cell ports the selected function does not have.
 *
 * An input slot beyond the selected arity is exempt from its row constraint
 * and all of its selectors are forced off; an output position beyond the
 * selected out-arity may not feed any sink and is exempt from its column
 * constraint.  Homogeneous bases add nothing.
 */
inline void add_uucp( encoding_context& ctx, fabric& fab, basis const& b )
{
  auto& g = ctx.g;
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> sink_of, source_of;
  for ( auto j = 0u; j < fab.sinks.size(); ++j )
    if ( fab.sinks[j].type == sink_ref::kind::cell )
      sink_of[{fab.sinks[j].index, fab.sinks[j].pos}] = j;
  for ( auto i = 0u; i < fab.sources.size(); ++i )
    if ( fab.sources[i].type == source_ref::kind::cell )
      source_of[{fab.sources[i].index, fab.sources[i].pos}] = i;
  auto cols = fab.columns();

  for ( auto c = 0u; c < fab.cells.size(); ++c )
  {
    auto const& cell = fab.cells[c];
    for ( auto p = 0u; p < cell.width_in; ++p )
    {
      std::vector<node_id> codes;
      for ( auto code = 0u; code < cell.functions.size(); ++code )
        if ( b.functions[cell.functions[code]].num_inputs() <= p )
          codes.push_back( cell.decoders[code] );
      if ( codes.empty() )
        continue;
      auto const unused = g.make_or( codes );
      auto const j = sink_of.at( {c, p} );
      fab.sink_exempt[j] = unused;
      for ( auto const& [i, v] : fab.rows[j] )
        ctx.constraints.push_back( g.make_or( g.make_not( unused ), g.make_not( g.variable( v ) ) ) );
    }
    for ( auto p = 0u; p < cell.width_out; ++p )
    {
      std::vector<node_id> codes;
      for ( auto code = 0u; code < cell.functions.size(); ++code )
        if ( b.functions[cell.functions[code]].num_outputs() <= p )
          codes.push_back( cell.decoders[code] );
      if ( codes.empty() )
        continue;
      auto const absent = g.make_or( codes );
      auto const i = source_of.at( {c, p} );
      fab.source_absent[i] = absent;
      for ( auto const& [j, v] : cols[i] )
        ctx.constraints.push_back( g.make_or( g.make_not( absent ), g.make_not( g.variable( v ) ) ) );
    }
  }
}

namespace detail
{

inline void at_most_one( encoding_context& ctx, std::vector<var> const& vs )
{
  auto& g = ctx.g;
  for ( auto a = 0u; a < vs.size(); ++a )
    for ( auto b = a + 1u; b < vs.size(); ++b )
      ctx.constraints.push_back( g.make_or( g.make_not( g.variable( vs[a] ) ), g.make_not( g.variable( vs[b] ) ) ) );
}

inline void at_least_one( encoding_context& ctx, std::vector<var> const& vs, std::optional<node_id> exempt )
{
  auto& g = ctx.g;
  std::vector<node_id> lits;
  if ( exempt )
    lits.push_back( *exempt );
  for ( auto v : vs )
    lits.push_back( g.variable( v ) );
  ctx.constraints.push_back( g.make_or( lits ) );
}

} // namespace detail

/*! \brief Row and column cardinality constraints (pairwise at-most-one plus an at-least-one clause).
 *
 * Every sink except the garbage sink gets exactly one source.  Columns:
 * circuit mode at-least-one everywhere; boolean-function mode at-least-one
 * on input columns and exactly-one on the rest; network mode exactly-one.
 */
inline void add_cardinality( encoding_context& ctx, fabric const& fab )
{
  for ( auto j = 0u; j < fab.sinks.size(); ++j )
  {
    if ( fab.sinks[j].type == sink_ref::kind::garbage )
      continue;
    std::vector<var> vs;
    for ( auto const& [i, v] : fab.rows[j] )
      vs.push_back( v );
    detail::at_least_one( ctx, vs, fab.sink_exempt[j] );
    detail::at_most_one( ctx, vs );
  }
  auto const cols = fab.columns();
  for ( auto i = 0u; i < fab.sources.size(); ++i )
  {
    std::vector<var> vs;
    for ( auto const& [j, v] : cols[i] )
      vs.push_back( v );
    bool const primary = fab.sources[i].type != source_ref::kind::cell;
    detail::at_least_one( ctx, vs, fab.source_absent[i] );
    bool const exactly = fab.mode == topology_mode::network || ( fab.mode == topology_mode::boolean_function && !primary );
    if ( exactly )
      detail::at_most_one( ctx, vs );
  }
}

/*! \brief Symmetry breaking for commuting cell inputs.
 *
 * For a commuting slot pair (p, q) with shared candidate list s_1..s_n the
 * chain s_{q,j} -> s_{p,1} | ... | s_{p,j-1} is added (strict form) or with
 * s_{p,j} included (non-strict form, which keeps gates whose commuting inputs
 * share one source, e.g. NAND(a, a)).  Constraints are conditioned on the
 * codes whose function commutes on that pair.
 */
inline void add_symmetry_breaking( encoding_context& ctx, fabric const& fab, basis const& b, commutation_map const& cm, bool strict = false )
{
  auto& g = ctx.g;
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> sink_of;
  for ( auto j = 0u; j < fab.sinks.size(); ++j )
    if ( fab.sinks[j].type == sink_ref::kind::cell )
      sink_of[{fab.sinks[j].index, fab.sinks[j].pos}] = j;

  for ( auto c = 0u; c < fab.cells.size(); ++c )
  {
    auto const& cell = fab.cells[c];
    std::map<std::pair<uint32_t, uint32_t>, std::vector<uint32_t>> by_pair;
    for ( auto code = 0u; code < cell.functions.size(); ++code )
      for ( auto const& pr : cm.at( cell.functions[code] ) )
        by_pair[pr].push_back( code );
    for ( auto const& [pr, codes] : by_pair )
    {
      auto const [p, q] = pr;
      std::optional<node_id> cond;
      if ( codes.size() != cell.functions.size() )
      {
        std::vector<node_id> ds;
        for ( auto code : codes )
          ds.push_back( cell.decoders[code] );
        cond = g.make_or( ds );
      }
      auto const& rp = fab.rows[sink_of.at( {c, p} )];
      auto const& rq = fab.rows[sink_of.at( {c, q} )];
      for ( auto j = 0u; j < rq.size(); ++j )
      {
        std::vector<node_id> lits{g.make_not( g.variable( rq[j].second ) )};
        if ( cond )
          lits.push_back( g.make_not( *cond ) );
        for ( auto i = 0u; i < ( strict ? j : j + 1u ) && i < rp.size(); ++i )
          lits.push_back( g.variable( rp[i].second ) );
        ctx.constraints.push_back( g.make_or( lits ) );
      }
    }
  }
}

/*! \brief A miter or synthesis formula with what is needed to decode its witnesses. */
struct encoding
{
  qbf2 q;
  basis b;
  std::vector<std::string> input_names;
  std::vector<std::string> output_names;
  std::vector<universal_cell> cells;
  /* label selection: cells sit on the nodes of a fixed topology */
  std::optional<topology> topo;
  std::vector<uint32_t> cell_node;
  /* synthesis: cells are wired through a fabric */
  std::optional<fabric> fab;
  std::vector<std::optional<bool>> ancilla_fixed; /* nullopt: chosen by the solver */
  std::vector<var> ancilla_vars;                  /* 0 when fixed */

  std::map<var, bool> assignment( std::vector<bool> const& witness ) const
  {
    if ( witness.size() != q.S.size() )
      throw std::invalid_argument( "witness does not cover S" );
    std::map<var, bool> m;
    for ( auto i = 0u; i < q.S.size(); ++i )
      m[q.S[i]] = witness[i];
    return m;
  }

  /*! \brief Meaning of every S variable, one per line (id, position in S, meaning). */
  std::string dump() const
  {
    std::map<var, std::string> meaning;
    for ( auto c = 0u; c < cells.size(); ++c )
    {
      auto const& cell = cells[c];
      for ( auto bit = 0u; bit < cell.selectors.size(); ++bit )
        meaning[cell.selectors[bit]] = "cell " + std::to_string( c ) + " selector bit " + std::to_string( bit ) + " of " +
                                       std::to_string( cell.selectors.size() );
    }
    if ( fab )
    {
      for ( auto j = 0u; j < fab->rows.size(); ++j )
        for ( auto const& [i, v] : fab->rows[j] )
          meaning[v] = "connect " + describe( fab->sources[i], input_names ) + " -> " + describe( fab->sinks[j], output_names );
    }
    for ( auto a = 0u; a < ancilla_vars.size(); ++a )
      if ( ancilla_vars[a] )
        meaning[ancilla_vars[a]] = "ancilla " + std::to_string( a ) + " value";
    std::ostringstream os;
    for ( auto c = 0u; c < cells.size(); ++c )
    {
      os << "# cell " << c;
      if ( topo )
        os << " (node " << cell_node[c] << ")";
      os << " codes:";
      for ( auto code = 0u; code < cells[c].functions.size(); ++code )
        os << ' ' << code << '=' << b.functions[cells[c].functions[code]].name();
      os << '\n';
    }
    for ( auto i = 0u; i < q.S.size(); ++i )
      os << "S " << q.S[i] << ' ' << ( i + 1u ) << ' ' << meaning[q.S[i]] << '\n';
    return os.str();
  }
};

namespace detail
{

inline std::vector<uint32_t> topo_order( topology const& t )
{
  std::vector<uint32_t> indeg( t.num_nodes, 0u );
  std::vector<std::vector<uint32_t>> succ( t.num_nodes );
  for ( auto const& a : t.arcs )
  {
    ++indeg[a.dst];
    succ[a.src].push_back( a.dst );
  }
  std::vector<uint32_t> order, ready;
  for ( auto i = t.num_nodes; i-- > 0u; )
    if ( indeg[i] == 0u )
      ready.push_back( i );
  while ( !ready.empty() )
  {
    auto const n = ready.back();
    ready.pop_back();
    order.push_back( n );
    for ( auto s : succ[n] )
      if ( --indeg[s] == 0u )
        ready.push_back( s );
  }
  if ( order.size() != t.num_nodes )
    throw invalid_circuit( "topology contains a cycle" );
  return order;
}

inline void check_names( std::vector<std::string> a, std::vector<std::string> b, char const* what )
{
  std::sort( a.begin(), a.end() );
  std::sort( b.begin(), b.end() );
  if ( a != b )
    throw interface_error( std::string( what ) + " names of topology and requirement differ" );
}

} // namespace detail

/*! \brief Basis functions that can label a topology node (exact arity, enough outputs). */
inline std::vector<uint32_t> label_candidates( basis const& b, topology const& t, uint32_t node )
{
  auto const k = static_cast<uint32_t>( t.in_arcs( node ).size() );
  auto const need = t.used_outputs( node );
  std::vector<uint32_t> c;
  for ( auto i = 0u; i < b.size(); ++i )
    if ( b.functions[i].num_inputs() == k && b.functions[i].num_outputs() >= need )
      c.push_back( i );
  return c;
}

/*! \brief Miter between the requirement and its topology with a universal cell on every internal node. */
inline encoding create_miter( basis const& b, topology const& topo, circuit const& psi )
{
  std::vector<std::string> topo_inputs;
  for ( auto n : topo.input_nodes() )
    topo_inputs.push_back( topo.chi[n] );
  std::vector<std::string> topo_outputs;
  for ( auto const& o : topo.omega )
    topo_outputs.push_back( o.name );
  detail::check_names( topo_inputs, psi.input_names(), "input" );
  detail::check_names( topo_outputs, psi.output_names(), "output" );

  encoding_context ctx;
  encoding enc;
  enc.b = b;
  enc.input_names = psi.input_names();
  enc.output_names = psi.output_names();
  std::map<std::string, node_id> pi;
  std::vector<node_id> pi_nodes;
  for ( auto const& n : enc.input_names )
  {
    pi_nodes.push_back( ctx.fresh_input() );
    pi[n] = pi_nodes.back();
  }
  auto const psi_out = circuit_to_graph( ctx.g, psi, pi_nodes );

  std::vector<std::vector<node_id>> wire( topo.num_nodes );
  for ( auto n : detail::topo_order( topo ) )
  {
    if ( !topo.chi[n].empty() )
    {
      wire[n] = {pi.at( topo.chi[n] )};
      continue;
    }
    auto const cands = label_candidates( b, topo, n );
    if ( cands.empty() )
      throw std::invalid_argument( "no basis function fits node " + std::to_string( n ) + " of the topology" );
    std::vector<node_id> in;
    for ( auto const& a : topo.in_arcs( n ) )
      in.push_back( wire[a.src].at( a.src_index ) );
    auto cell = build_universal_cell( ctx, b, in, cands );
    wire[n] = cell.outputs;
    enc.cells.push_back( std::move( cell ) );
    enc.cell_node.push_back( n );
  }

  std::vector<node_id> ties;
  for ( auto j = 0u; j < psi.num_outputs(); ++j )
  {
    auto const& name = psi.outputs()[j].name;
    auto const it = std::find_if( topo.omega.begin(), topo.omega.end(), [&]( auto const& o ) { return o.name == name; } );
    auto const phi = wire[it->driver.node].at( it->driver.index );
    ties.push_back( ctx.g.make_xnor( phi, psi_out[j] ) );
  }
  ctx.finish( ties );
  enc.topo = topo;
  enc.q.S = ctx.S;
  enc.q.X = ctx.X;
  enc.q.matrix = std::move( ctx.g );
  return enc;
}

struct synthesis_encoding_options
{
  topology_mode mode{topology_mode::circuit};
  bool uucp{true};
  bool symmetry_breaking{true};
  bool strict_symmetry{false};
  uint32_t ancillae{0};
  std::vector<std::optional<bool>> ancilla_values; /* missing or nullopt: chosen by the solver */
};

/*! \brief The k-cell synthesis formula: cells, fabric, cardinality, UUCP, symmetry breaking and miter. */
inline encoding build_synthesis_encoding( basis const& b, circuit const& psi, uint32_t k, synthesis_encoding_options const& opt = {} )
{
  encoding_context ctx;
  encoding enc;
  enc.b = b;
  enc.input_names = psi.input_names();
  enc.output_names = psi.output_names();
  std::vector<node_id> pi_nodes;
  for ( auto i = 0u; i < psi.num_inputs(); ++i )
    pi_nodes.push_back( ctx.fresh_input() );
  auto const psi_out = circuit_to_graph( ctx.g, psi, pi_nodes );

  std::vector<node_id> anc;
  for ( auto a = 0u; a < opt.ancillae; ++a )
  {
    std::optional<bool> fixed = a < opt.ancilla_values.size() ? opt.ancilla_values[a] : std::nullopt;
    enc.ancilla_fixed.push_back( fixed );
    if ( fixed )
    {
      enc.ancilla_vars.push_back( 0u );
      anc.push_back( ctx.g.constant( *fixed ) );
    }
    else
    {
      anc.push_back( ctx.fresh_selector() );
      enc.ancilla_vars.push_back( ctx.S.back() );
    }
  }

  auto fab = build_fabric( ctx, k, pi_nodes, psi.num_outputs(), b, opt.mode, anc );
  if ( opt.uucp )
    add_uucp( ctx, fab, b );
  add_cardinality( ctx, fab );
  if ( opt.symmetry_breaking )
    add_symmetry_breaking( ctx, fab, b, commuting_input_pairs( b ), opt.strict_symmetry );

  std::vector<node_id> ties;
  for ( auto j = 0u; j < fab.sinks.size(); ++j )
    if ( fab.sinks[j].type == sink_ref::kind::output )
      ties.push_back( ctx.g.make_xnor( fab.sink_value[j], psi_out[fab.sinks[j].index] ) );
  ctx.finish( ties );
  enc.cells = fab.cells;
  enc.fab = std::move( fab );
  enc.q.S = ctx.S;
  enc.q.X = ctx.X;
  enc.q.matrix = std::move( ctx.g );
  return enc;
}

} // namespace exsyn
