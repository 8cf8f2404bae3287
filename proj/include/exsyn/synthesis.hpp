#pragma once

#include "bases.hpp"
#include "circuit.hpp"
#include "encoder.hpp"
#include "formula.hpp"
#include "solver.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace exsyn
{

/* ---------------------------------------------------------------------- */
/* verification                                                           */
/* ---------------------------------------------------------------------- */

struct verify_result
{
  bool equivalent{false};
  std::optional<std::vector<bool>> counterexample; /* in the candidate's input order */
  bool by_name{true};
  std::string method; /* truth-table or sat-miter */
};

/*! \brief SAT check of the XOR miter; unsatisfiable means equivalent. */
inline verify_result verify_sat( circuit const& candidate, circuit const& psi, port_pairing const& p )
{
  gate_graph g;
  std::vector<node_id> a_in, b_in( psi.num_inputs() );
  for ( auto i = 0u; i < candidate.num_inputs(); ++i )
  {
    a_in.push_back( g.variable( i + 1u ) );
    b_in[p.input_perm[i]] = a_in.back();
  }
  auto const ao = circuit_to_graph( g, candidate, a_in );
  auto const bo = circuit_to_graph( g, psi, b_in );
  std::vector<node_id> diffs;
  for ( auto j = 0u; j < ao.size(); ++j )
    diffs.push_back( g.make_xor( ao[j], bo[p.output_perm[j]] ) );
  g.set_root( g.make_or( diffs ) );
  verify_result r;
  r.by_name = p.by_name;
  r.method = "sat-miter";
  auto const t = tseitin( g );
  auto f = t.formula;
  f.num_vars = std::max<uint32_t>( f.num_vars, candidate.num_inputs() );
  auto const s = solve_sat( f );
  if ( s.status == sat_status::unsat )
  {
    r.equivalent = true;
    return r;
  }
  if ( s.status != sat_status::sat )
    throw std::runtime_error( "equivalence check did not finish" );
  std::vector<bool> cex;
  for ( auto i = 0u; i < candidate.num_inputs(); ++i )
    cex.push_back( s.model[i + 1u] );
  r.counterexample = cex;
  return r;
}

/*! \brief Equivalence of a candidate with the requirement.
 *
 * Ports pair by name when both circuits use the same names, otherwise by
 * position.  Exhaustive simulation up to `cap` inputs, the SAT miter beyond.
 */
inline verify_result verify( circuit const& candidate, circuit const& psi, uint32_t cap = default_truth_table_cap )
{
  auto const p = pair_ports( candidate, psi, true );
  if ( candidate.num_inputs() > cap )
    return verify_sat( candidate, psi, p );
  verify_result r;
  r.by_name = p.by_name;
  r.method = "truth-table";
  r.counterexample = first_difference( candidate, psi, p, cap );
  r.equivalent = !r.counterexample.has_value();
  return r;
}

/* ---------------------------------------------------------------------- */
/* witnesses                                                              */
/* ---------------------------------------------------------------------- */

/*! \brief Decodes a witness into a circuit; throws std::logic_error if it does not decode. */
inline circuit reconstruct_circuit( encoding const& enc, std::vector<bool> const& witness )
{
  auto const val = enc.assignment( witness );
  auto value = [&]( var v ) { return val.at( v ); };
  auto function_of = [&]( universal_cell const& cell ) {
    auto const code = decode_code( cell, value );
    if ( code >= cell.functions.size() )
      throw std::logic_error( "witness selects an invalid code" );
    return enc.b.functions[cell.functions[code]];
  };

  if ( enc.topo )
  {
    std::vector<std::optional<boolean_function>> beta( enc.topo->num_nodes );
    for ( auto c = 0u; c < enc.cells.size(); ++c )
      beta[enc.cell_node[c]] = function_of( enc.cells[c] );
    auto circ = wrap_topology( *enc.topo, beta );
    if ( !validate( circ ).ok() )
      throw std::logic_error( "reconstructed circuit is invalid" );
    return circ;
  }
  if ( !enc.fab )
    throw std::logic_error( "encoding has neither topology nor fabric" );

  auto const& fab = *enc.fab;
  circuit circ;
  std::vector<uint32_t> pi_node;
  for ( auto const& n : enc.input_names )
    pi_node.push_back( circ.add_input( n ) );
  std::vector<std::optional<uint32_t>> anc_node( enc.ancilla_fixed.size() );
  std::vector<uint32_t> cell_node;
  std::vector<boolean_function> cell_fn;

  auto chosen = [&]( uint32_t sink ) -> std::optional<uint32_t> {
    std::optional<uint32_t> src;
    for ( auto const& [i, v] : fab.rows[sink] )
    {
      if ( !value( v ) )
        continue;
      if ( src )
        throw std::logic_error( "sink " + std::to_string( sink ) + " has several sources" );
      src = i;
    }
    return src;
  };
  auto signal_of = [&]( uint32_t src ) -> signal {
    auto const& s = fab.sources[src];
    switch ( s.type )
    {
    case source_ref::kind::input:
      return {pi_node[s.index], 0u};
    case source_ref::kind::ancilla:
    {
      if ( !anc_node[s.index] )
      {
        bool const v = enc.ancilla_fixed[s.index] ? *enc.ancilla_fixed[s.index] : value( enc.ancilla_vars[s.index] );
        anc_node[s.index] = circ.add_gate( gates::constant( v ), {}, "ancilla" + std::to_string( s.index ) );
      }
      return {*anc_node[s.index], 0u};
    }
    default:
      if ( s.index >= cell_node.size() || s.pos >= cell_fn[s.index].num_outputs() )
        throw std::logic_error( "witness uses a missing cell output" );
      return {cell_node[s.index], s.pos};
    }
  };

  std::map<std::pair<uint32_t, uint32_t>, uint32_t> sink_of;
  for ( auto j = 0u; j < fab.sinks.size(); ++j )
    if ( fab.sinks[j].type == sink_ref::kind::cell )
      sink_of[{fab.sinks[j].index, fab.sinks[j].pos}] = j;

  for ( auto c = 0u; c < fab.cells.size(); ++c )
  {
    auto const fn = function_of( fab.cells[c] );
    std::vector<signal> fanins;
    for ( auto p = 0u; p < fn.num_inputs(); ++p )
    {
      auto const src = chosen( sink_of.at( {c, p} ) );
      if ( !src )
        throw std::logic_error( "cell " + std::to_string( c ) + " input " + std::to_string( p ) + " is unconnected" );
      fanins.push_back( signal_of( *src ) );
    }
    cell_node.push_back( circ.add_gate( fn, fanins, "g" + std::to_string( c ) ) );
    cell_fn.push_back( fn );
  }
  for ( auto j = 0u; j < fab.sinks.size(); ++j )
  {
    if ( fab.sinks[j].type != sink_ref::kind::output )
      continue;
    auto const src = chosen( j );
    if ( !src )
      throw std::logic_error( "output " + enc.output_names[fab.sinks[j].index] + " is unconnected" );
    circ.add_output( enc.output_names[fab.sinks[j].index], signal_of( *src ) );
  }
  if ( !validate( circ ).ok() )
    throw std::logic_error( "reconstructed circuit is invalid" );
  return circ;
}

/*! \brief Selector assignment that encodes a given circuit, if the encoding can express it.
 *
 * Fabric encodings map the circuit's gates (in topological order) to the
 * cells; 0-ary constant gates are matched to ancillae in node order.
 */
inline std::optional<std::vector<bool>> witness_for_circuit( encoding const& enc, circuit const& c )
{
  std::map<var, bool> val;
  for ( auto v : enc.q.S )
    val[v] = false;
  auto set_code = [&]( universal_cell const& cell, boolean_function const& fn ) {
    for ( auto code = 0u; code < cell.functions.size(); ++code )
    {
      auto const& f = enc.b.functions[cell.functions[code]];
      if ( f.num_inputs() == fn.num_inputs() && f.same_table( fn ) )
      {
        auto const w = static_cast<uint32_t>( cell.selectors.size() );
        for ( auto b = 0u; b < w; ++b )
          val[cell.selectors[b]] = ( code >> ( w - 1u - b ) ) & 1u;
        return true;
      }
    }
    return false;
  };
  auto finish = [&]() {
    std::vector<bool> w;
    for ( auto v : enc.q.S )
      w.push_back( val[v] );
    return w;
  };

  if ( enc.topo )
  {
    if ( topology_of( c ).arcs != enc.topo->arcs )
      return std::nullopt;
    for ( auto k = 0u; k < enc.cells.size(); ++k )
    {
      auto const& nd = c.node( enc.cell_node[k] );
      if ( !nd.fn || !set_code( enc.cells[k], *nd.fn ) )
        return std::nullopt;
    }
    return finish();
  }

  auto const& fab = *enc.fab;
  std::vector<uint32_t> gates_in_order, consts;
  for ( auto n : c.topological_order() )
  {
    auto const& nd = c.node( n );
    if ( !nd.fn )
      continue;
    if ( nd.fn->num_inputs() == 0u && consts.size() < enc.ancilla_fixed.size() && nd.label.rfind( "ancilla", 0 ) == 0u )
      consts.push_back( n );
    else
      gates_in_order.push_back( n );
  }
  std::sort( consts.begin(), consts.end() );
  if ( gates_in_order.size() != fab.cells.size() )
    return std::nullopt;
  std::map<uint32_t, uint32_t> cell_of;
  for ( auto k = 0u; k < gates_in_order.size(); ++k )
    cell_of[gates_in_order[k]] = k;
  std::map<uint32_t, uint32_t> anc_of;
  for ( auto a = 0u; a < consts.size(); ++a )
  {
    anc_of[consts[a]] = a;
    bool v = false;
    c.node( consts[a] ).fn->is_constant_output( 0, v );
    if ( enc.ancilla_fixed[a] )
    {
      if ( *enc.ancilla_fixed[a] != v )
        return std::nullopt;
    }
    else
      val[enc.ancilla_vars[a]] = v;
  }

  std::map<std::string, uint32_t> input_index;
  for ( auto i = 0u; i < enc.input_names.size(); ++i )
    input_index[enc.input_names[i]] = i;
  auto source_of = [&]( signal s ) -> std::optional<uint32_t> {
    for ( auto i = 0u; i < fab.sources.size(); ++i )
    {
      auto const& r = fab.sources[i];
      if ( r.type == source_ref::kind::input && c.is_input( s.node ) && enc.input_names[r.index] == c.node( s.node ).input_name )
        return i;
      if ( r.type == source_ref::kind::ancilla && anc_of.count( s.node ) && anc_of[s.node] == r.index )
        return i;
      if ( r.type == source_ref::kind::cell && cell_of.count( s.node ) && cell_of[s.node] == r.index && r.pos == s.index )
        return i;
    }
    return std::nullopt;
  };
  std::vector<uint8_t> used( fab.sources.size(), 0u );
  auto connect = [&]( uint32_t sink, uint32_t src ) {
    for ( auto const& [i, v] : fab.rows[sink] )
    {
      if ( i == src )
      {
        val[v] = true;
        used[src] = 1u;
        return true;
      }
    }
    return false;
  };

  for ( auto k = 0u; k < gates_in_order.size(); ++k )
  {
    auto const n = gates_in_order[k];
    if ( !set_code( fab.cells[k], *c.node( n ).fn ) )
      return std::nullopt;
    auto const fi = c.fanins( n );
    for ( auto p = 0u; p < fi.size(); ++p )
    {
      auto const src = source_of( fi[p] );
      std::optional<uint32_t> sink;
      for ( auto j = 0u; j < fab.sinks.size(); ++j )
        if ( fab.sinks[j].type == sink_ref::kind::cell && fab.sinks[j].index == k && fab.sinks[j].pos == p )
          sink = j;
      if ( !src || !sink || !connect( *sink, *src ) )
        return std::nullopt;
    }
  }
  for ( auto const& o : c.outputs() )
  {
    auto const it = std::find( enc.output_names.begin(), enc.output_names.end(), o.name );
    if ( it == enc.output_names.end() )
      return std::nullopt;
    auto const idx = static_cast<uint32_t>( it - enc.output_names.begin() );
    auto const src = source_of( o.driver );
    std::optional<uint32_t> sink;
    for ( auto j = 0u; j < fab.sinks.size(); ++j )
      if ( fab.sinks[j].type == sink_ref::kind::output && fab.sinks[j].index == idx )
        sink = j;
    if ( !src || !sink || !connect( *sink, *src ) )
      return std::nullopt;
  }
  for ( auto j = 0u; j < fab.sinks.size(); ++j )
  {
    if ( fab.sinks[j].type != sink_ref::kind::garbage )
      continue;
    for ( auto i = 0u; i < fab.sources.size(); ++i )
    {
      if ( used[i] )
        continue;
      auto const& r = fab.sources[i];
      if ( r.type == source_ref::kind::cell && r.pos >= c.node( gates_in_order[r.index] ).fn->num_outputs() )
        continue;
      connect( j, i );
    }
  }
  return finish();
}

/*! \brief True if the matrix holds for every universal assignment once S is fixed to w.
 *
 * Applies to encodings without explicit inner variables (their internal
 * nodes are functionally determined), which is every encoding built here.
 */
inline bool holds_for_all( qbf2 const& q, std::vector<bool> const& w )
{
  if ( !q.Z.empty() || q.is_cnf() )
    throw std::invalid_argument( "holds_for_all needs a gate-graph matrix without inner variables" );
  std::map<var, bool> fixed;
  for ( auto i = 0u; i < q.S.size(); ++i )
    fixed[q.S[i]] = w[i];
  auto const g = constant_fold( q.graph(), fixed );
  std::map<var, uint32_t> xi;
  for ( auto i = 0u; i < q.X.size(); ++i )
    xi[q.X[i]] = i;
  for ( uint64_t row = 0; row < ( uint64_t( 1 ) << q.X.size() ); ++row )
  {
    auto const ok = g.evaluate( [&]( var v ) {
      auto const i = xi.at( v );
      return bool( ( row >> ( q.X.size() - 1u - i ) ) & 1u );
    } );
    if ( !ok )
      return false;
  }
  return true;
}

/* ---------------------------------------------------------------------- */
/* solving an encoding                                                    */
/* ---------------------------------------------------------------------- */

struct solve_options
{
  sat_budget budget;
  uint64_t seed{0};
  std::string external_solver; /* empty: embedded solver */
};

/*! \brief Incremental solve/block loop over one encoding, embedded or external. */
class encoding_solver
{
public:
  encoding_solver( qbf2 const& q, solve_options const& opt ) : opt_( opt )
  {
    if ( opt.external_solver.empty() )
      session_.emplace( q, expansion_cap, opt.seed );
    else
      ex_ = expand_universal( q );
  }

  qbf_result solve( sat_budget const& budget )
  {
    if ( session_ )
      return session_->solve( budget );
    qbf_result r;
    r.copies = ex_.copies;
    r.expanded_vars = ex_.formula.num_vars;
    r.expanded_clauses = ex_.formula.clauses.size();
    auto const s = solve_sat_external( ex_.formula, opt_.external_solver, budget );
    r.status = s.status;
    r.stats = s.stats;
    if ( s.status == sat_status::sat )
      for ( auto v : ex_.s_vars )
        r.witness.push_back( s.model[v] );
    return r;
  }

  void block( std::vector<bool> const& w )
  {
    if ( session_ )
    {
      session_->block( w );
      return;
    }
    std::vector<lit> c;
    for ( auto i = 0u; i < w.size(); ++i )
      c.push_back( w[i] ? -static_cast<lit>( ex_.s_vars[i] ) : static_cast<lit>( ex_.s_vars[i] ) );
    if ( c.empty() )
      ex_.formula.clauses.push_back( {} );
    else
      ex_.formula.add_clause( c );
  }

private:
  solve_options opt_;
  std::optional<twoqbf_session> session_;
  expansion ex_;
};

namespace detail
{

inline sat_budget remaining( sat_budget const& b, std::chrono::steady_clock::time_point t0, uint64_t used_conflicts )
{
  sat_budget r = b;
  if ( b.seconds )
    r.seconds = std::max( 0.0, *b.seconds - std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count() );
  if ( b.conflicts )
    r.conflicts = *b.conflicts > used_conflicts ? *b.conflicts - used_conflicts : 0u;
  return r;
}

} // namespace detail

struct enumeration
{
  std::vector<circuit> circuits;
  std::vector<std::vector<bool>> witnesses;
  bool complete{false}; /* the final solve returned unsat */
  bool timed_out{false};
  sat_stats stats;
  double seconds{0.0};
};

/*! \brief Solves, reconstructs, verifies and blocks until unsat, the limit, or the budget. */
inline enumeration enumerate_solutions( encoding const& enc, circuit const& psi, uint64_t limit, solve_options const& opt )
{
  enumeration e;
  auto const t0 = std::chrono::steady_clock::now();
  encoding_solver s( enc.q, opt );
  while ( e.circuits.size() < limit )
  {
    auto const r = s.solve( detail::remaining( opt.budget, t0, e.stats.conflicts ) );
    e.stats += r.stats;
    if ( r.status == sat_status::unsat )
    {
      e.complete = true;
      break;
    }
    if ( r.status == sat_status::unknown )
    {
      e.timed_out = true;
      break;
    }
    auto circ = reconstruct_circuit( enc, r.witness );
    circ.set_name( psi.name() );
    if ( !verify( circ, psi ).equivalent )
      throw std::logic_error( "internal error: reconstructed circuit is not equivalent to the requirement" );
    e.circuits.push_back( std::move( circ ) );
    e.witnesses.push_back( r.witness );
    s.block( r.witness );
  }
  e.seconds = std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count();
  return e;
}

/* ---------------------------------------------------------------------- */
/* label selection and counting                                           */
/* ---------------------------------------------------------------------- */

struct label_result
{
  sat_status status{sat_status::unknown};
  std::optional<circuit> solution;
  sat_stats stats;
};

/*! \brief Labels the topology of psi with basis functions so that the result is equivalent to psi. */
inline label_result label_select( basis const& b, circuit const& psi, solve_options const& opt = {} )
{
  auto const enc = create_miter( b, topology_of( psi ), psi );
  auto const e = enumerate_solutions( enc, psi, 1u, opt );
  label_result r;
  r.stats = e.stats;
  if ( !e.circuits.empty() )
  {
    r.status = sat_status::sat;
    r.solution = e.circuits.front();
  }
  else
    r.status = e.timed_out ? sat_status::unknown : sat_status::unsat;
  return r;
}

struct count_result
{
  uint64_t count{0};
  bool complete{false};   /* every labeling was found */
  bool lower_bound{false}; /* the count is partial (budget or limit reached) */
  std::vector<circuit> solutions;
  sat_stats stats;
};

/*! \brief Number of distinct selector assignments that label psi's topology correctly. */
inline count_result label_count( basis const& b, circuit const& psi, uint64_t limit, solve_options const& opt = {} )
{
  auto const enc = create_miter( b, topology_of( psi ), psi );
  auto const e = enumerate_solutions( enc, psi, limit, opt );
  count_result r;
  r.count = e.circuits.size();
  r.complete = e.complete;
  r.lower_bound = !e.complete;
  r.solutions = e.circuits;
  r.stats = e.stats;
  return r;
}

/* ---------------------------------------------------------------------- */
/* bounds                                                                 */
/* ---------------------------------------------------------------------- */

/*! \brief Size cap for synthesis: psi's own size if it already uses the basis, else a two-level count.
 *
 * The two-level count realizes every output as an OR of minterm ANDs with
 * two-input gates: (m-1) ANDs per minterm, t-1 ORs for t minterms, plus one
 * inverter per input that appears complemented.
 */
inline uint32_t default_upper_bound( basis const& b, circuit const& psi, uint32_t cap = default_truth_table_cap )
{
  bool inside = true;
  for ( auto const& nd : psi.nodes() )
    if ( nd.fn && b.find( *nd.fn ) < 0 )
      inside = false;
  if ( inside )
    return psi.num_gates();
  auto const tt = truth_table( psi, cap );
  auto const m = tt.num_inputs();
  uint64_t gates = 0;
  std::vector<bool> inverted( m, false );
  for ( auto o = 0u; o < tt.num_outputs(); ++o )
  {
    uint64_t t = 0;
    for ( uint64_t r = 0; r < tt.num_rows(); ++r )
    {
      if ( !tt.get( r, o ) )
        continue;
      ++t;
      for ( auto i = 0u; i < m; ++i )
        if ( !boolean_function::input_bit( r, m, i ) )
          inverted[i] = true;
    }
    gates += t * ( m > 0u ? m - 1u : 0u ) + ( t > 0u ? t - 1u : 0u );
  }
  gates += static_cast<uint64_t>( std::count( inverted.begin(), inverted.end(), true ) );
  return static_cast<uint32_t>( std::max<uint64_t>( gates, 1u ) );
}

struct size_row
{
  uint32_t ancillae{0};
  uint32_t k{0};
  sat_status status{sat_status::unknown};
  uint32_t gates{0};
  uint64_t solutions{0};
  double seconds{0.0};
  uint64_t conflicts{0};
};

inline std::string status_word( sat_status s )
{
  return s == sat_status::unknown ? "timeout" : to_string( s );
}

/*! \brief Per-size outcomes and the bounds they prove. */
struct size_bounds
{
  std::vector<size_row> rows;

  /*! \brief Smallest size with a circuit. */
  std::optional<uint32_t> upper() const
  {
    std::optional<uint32_t> u;
    for ( auto const& r : rows )
      if ( r.status == sat_status::sat && ( !u || r.k < *u ) )
        u = r.k;
    return u;
  }

  /*! \brief One more than the largest size below which everything was proven unsat (per ancilla count, minimized). */
  std::optional<uint32_t> lower() const
  {
    std::map<uint32_t, std::map<uint32_t, sat_status>> by_anc;
    for ( auto const& r : rows )
      by_anc[r.ancillae][r.k] = r.status;
    std::optional<uint32_t> best;
    for ( auto const& [a, ks] : by_anc )
    {
      uint32_t lo = ks.begin()->first;
      for ( auto const& [k, st] : ks )
      {
        if ( k != lo || st != sat_status::unsat )
          break;
        ++lo;
      }
      if ( !best || lo < *best )
        best = lo;
    }
    return best;
  }

  bool optimal() const
  {
    auto const u = upper();
    auto const l = lower();
    return u && l && *u == *l;
  }

  /*! \brief False if some size reports unsat above a size that reported sat (same ancilla count). */
  bool monotone() const
  {
    for ( auto const& a : rows )
      for ( auto const& b : rows )
        if ( a.ancillae == b.ancillae && a.status == sat_status::sat && b.status == sat_status::unsat && b.k > a.k )
          return false;
    return true;
  }

  std::string to_csv( std::string const& family, std::string const& n, bool header = true ) const
  {
    std::ostringstream os;
    if ( header )
      os << "family,n,k,status,gates,wall_time,conflicts\n";
    for ( auto const& r : rows )
      os << family << ',' << n << ',' << r.k << ',' << status_word( r.status ) << ',' << r.gates << ',' << r.seconds << ','
         << r.conflicts << '\n';
    return os.str();
  }
};

/* ---------------------------------------------------------------------- */
/* synthesis                                                              */
/* ---------------------------------------------------------------------- */

struct synthesis_config
{
  basis b;
  topology_mode mode{topology_mode::circuit};
  bool symmetry_breaking{true};
  bool strict_symmetry{false};
  uint32_t min_components{1};
  uint32_t max_components{0}; /* 0: default_upper_bound */
  sat_budget per_size;
  bool enumerate{false};
  uint64_t enumeration_limit{1};
  bool stop_at_first{true};
  std::vector<uint32_t> ancilla_counts{0};
  std::vector<std::optional<bool>> ancilla_values;
  uint32_t jobs{1};
  uint64_t seed{0};
  std::string external_solver;
};

struct synthesis_result
{
  std::vector<circuit> circuits; /* size-ordered */
  std::vector<uint32_t> circuit_ancillae;
  size_bounds bounds;
};

/*! \brief A zero-gate realization when every output equals some input. */
inline std::optional<circuit> wire_only_realization( circuit const& psi )
{
  if ( psi.num_inputs() > default_truth_table_cap )
    return std::nullopt;
  auto const tt = truth_table( psi );
  circuit c;
  c.set_name( psi.name() );
  std::vector<uint32_t> pis;
  for ( auto const& n : psi.input_names() )
    pis.push_back( c.add_input( n ) );
  for ( auto o = 0u; o < psi.num_outputs(); ++o )
  {
    std::optional<uint32_t> hit;
    for ( auto i = 0u; i < psi.num_inputs() && !hit; ++i )
    {
      bool same = true;
      for ( uint64_t r = 0; r < tt.num_rows() && same; ++r )
        same = tt.get( r, o ) == boolean_function::input_bit( r, psi.num_inputs(), i );
      if ( same )
        hit = i;
    }
    if ( !hit )
      return std::nullopt;
    c.add_output( psi.outputs()[o].name, {pis[*hit], 0u} );
  }
  return c;
}

namespace detail
{

struct size_outcome
{
  size_row row;
  std::vector<circuit> circuits;
};

inline size_outcome solve_size( synthesis_config const& cfg, circuit const& psi, uint32_t k, uint32_t anc )
{
  synthesis_encoding_options eo;
  eo.mode = cfg.mode;
  eo.symmetry_breaking = cfg.symmetry_breaking;
  eo.strict_symmetry = cfg.strict_symmetry;
  eo.ancillae = anc;
  eo.ancilla_values = cfg.ancilla_values;
  auto const enc = build_synthesis_encoding( cfg.b, psi, k, eo );
  solve_options so;
  so.budget = cfg.per_size;
  so.seed = cfg.seed;
  so.external_solver = cfg.external_solver;
  auto const e = enumerate_solutions( enc, psi, cfg.enumerate ? cfg.enumeration_limit : 1u, so );
  size_outcome out;
  out.row.ancillae = anc;
  out.row.k = k;
  out.row.seconds = e.seconds;
  out.row.conflicts = e.stats.conflicts;
  out.row.solutions = e.circuits.size();
  if ( !e.circuits.empty() )
  {
    out.row.status = sat_status::sat;
    out.row.gates = k;
  }
  else
    out.row.status = e.timed_out ? sat_status::unknown : sat_status::unsat;
  out.circuits = e.circuits;
  return out;
}

} // namespace detail

/*! \brief Finds minimum-size circuits by trying k = 1, 2, ... cells in one encoding each.
 *
 * Ancilla counts are swept outermost.  A timeout at one size is recorded and
 * the sweep continues; sizes can be solved in parallel (`jobs`) and results
 * are reported in size order.
 */
inline synthesis_result synthesize( synthesis_config const& cfg, circuit const& psi )
{
  synthesis_result res;
  auto const max_k = cfg.max_components ? cfg.max_components : default_upper_bound( cfg.b, psi );
  for ( auto anc : cfg.ancilla_counts )
  {
    bool found = false;
    if ( cfg.min_components <= 1u && anc == 0u )
    {
      size_row r0;
      r0.k = 0;
      auto const t0 = std::chrono::steady_clock::now();
      auto wires = wire_only_realization( psi );
      r0.seconds = std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count();
      r0.status = wires ? sat_status::sat : sat_status::unsat;
      r0.solutions = wires ? 1u : 0u;
      res.bounds.rows.push_back( r0 );
      if ( wires )
      {
        res.circuits.push_back( *wires );
        res.circuit_ancillae.push_back( 0u );
        found = true;
        if ( cfg.stop_at_first )
          continue;
      }
    }
    std::mutex mtx;
    auto const jobs = std::max<uint32_t>( 1u, cfg.jobs );
    for ( uint32_t k = std::max<uint32_t>( 1u, cfg.min_components ); k <= max_k; k += jobs )
    {
      std::vector<std::future<detail::size_outcome>> futs;
      for ( uint32_t kk = k; kk < k + jobs && kk <= max_k; ++kk )
        futs.push_back( std::async( jobs > 1u ? std::launch::async : std::launch::deferred,
                                    [&, kk]() { return detail::solve_size( cfg, psi, kk, anc ); } ) );
      for ( auto& f : futs )
      {
        auto out = f.get();
        std::lock_guard<std::mutex> lock( mtx );
        res.bounds.rows.push_back( out.row );
        for ( auto& c : out.circuits )
        {
          res.circuits.push_back( std::move( c ) );
          res.circuit_ancillae.push_back( anc );
        }
        found |= out.row.status == sat_status::sat;
      }
      if ( found && cfg.stop_at_first )
        break;
    }
  }
  return res;
}

/* ---------------------------------------------------------------------- */
/* brute-force topology search                                            */
/* ---------------------------------------------------------------------- */

/*! \brief Every basis function under every input permutation (duplicates by table removed). */
inline basis permutation_closure( basis const& b )
{
  basis r;
  r.name = b.name + "-permuted";
  for ( auto const& f : b.functions )
  {
    auto const m = f.num_inputs();
    std::vector<uint32_t> perm( m );
    std::iota( perm.begin(), perm.end(), 0u );
    do
    {
      bool identity = std::is_sorted( perm.begin(), perm.end() );
      std::string name = f.name();
      if ( !identity )
      {
        name += "[";
        for ( auto i = 0u; i < m; ++i )
          name += ( i ? "," : "" ) + std::to_string( perm[i] );
        name += "]";
      }
      /* slot i of the permuted function feeds input perm[i] of f */
      auto g = boolean_function::from_rows( name, m, f.num_outputs(), [&]( uint64_t row ) {
        uint64_t src = 0;
        for ( auto i = 0u; i < m; ++i )
          if ( boolean_function::input_bit( row, m, i ) )
            src |= uint64_t( 1 ) << ( m - 1u - perm[i] );
        return f.row( src );
      } );
      bool dup = false;
      for ( auto const& h : r.functions )
        if ( h.num_inputs() == g.num_inputs() && h.same_table( g ) )
          dup = true;
      if ( !dup )
        r.functions.push_back( g );
    } while ( m <= 5u && std::next_permutation( perm.begin(), perm.end() ) );
  }
  return r;
}

/*! \brief Directed edges of the complete fabric K_{m,n,k}: k(m + n + k - 1). */
inline uint64_t complete_fabric_edges( uint64_t m, uint64_t n, uint64_t k )
{
  return k * ( m + n + k - 1u );
}

struct exhaustive_result
{
  std::optional<uint32_t> size;
  std::vector<circuit> circuits;   /* one per topology that admits a labeling */
  uint64_t subsets_examined{0};
  uint64_t topologies_tried{0};    /* well-formed subsets handed to label selection */
  std::vector<uint64_t> subsets_per_size;
};

/*! \brief Brute force over edge subsets of K_{m,n,k} for k = 1..cap, label selection on each.
 *
 * Skipped subsets: cycles, outputs without exactly one driver, two outputs
 * on one gate, unused inputs or gates, and gate in-degrees no basis function
 * has.  Slot order follows source order; the permutation closure of the
 * basis covers the other orders.
 */
inline exhaustive_result exhaustive_search( basis const& b, circuit const& psi, uint32_t cap, solve_options const& opt = {},
                                            uint32_t max_edges = 24u )
{
  for ( auto const& f : b.functions )
    if ( f.num_outputs() != 1u )
      throw std::invalid_argument( "exhaustive search supports single-output bases only" );
  auto const closure = permutation_closure( b );
  std::set<uint32_t> arities;
  for ( auto const& f : b.functions )
    arities.insert( f.num_inputs() );
  auto const m = psi.num_inputs();
  auto const n = psi.num_outputs();
  auto const in_names = psi.input_names();
  auto const out_names = psi.output_names();
  exhaustive_result res;

  for ( uint32_t k = 1; k <= cap; ++k )
  {
    auto const ne = complete_fabric_edges( m, n, k );
    if ( ne > max_edges )
      throw std::invalid_argument( "subset space 2^" + std::to_string( ne ) + " exceeds the search cap" );
    /* edge list: (kind, a, b): 0 = input a -> gate b, 1 = gate a -> gate b, 2 = gate a -> output b */
    struct kedge
    {
      uint8_t kind;
      uint32_t a, b;
    };
    std::vector<kedge> edges;
    for ( auto g = 0u; g < k; ++g )
      for ( auto i = 0u; i < m; ++i )
        edges.push_back( {0u, i, g} );
    for ( auto g = 0u; g < k; ++g )
      for ( auto h = 0u; h < k; ++h )
        if ( g != h )
          edges.push_back( {1u, h, g} );
    for ( auto g = 0u; g < k; ++g )
      for ( auto o = 0u; o < n; ++o )
        edges.push_back( {2u, g, o} );

    uint64_t examined = 0;
    for ( uint64_t mask = 0; mask < ( uint64_t( 1 ) << ne ); ++mask )
    {
      ++examined;
      std::vector<uint32_t> indeg( k, 0u ), outdeg( k, 0u ), po_driver_count( n, 0u ), po_driver( n, 0u ), pi_use( m, 0u );
      std::vector<std::vector<uint32_t>> gate_in_pi( k ), gate_in_gate( k );
      for ( auto e = 0u; e < ne; ++e )
      {
        if ( !( ( mask >> e ) & 1u ) )
          continue;
        auto const& ed = edges[e];
        if ( ed.kind == 0u )
        {
          ++indeg[ed.b];
          ++pi_use[ed.a];
          gate_in_pi[ed.b].push_back( ed.a );
        }
        else if ( ed.kind == 1u )
        {
          ++indeg[ed.b];
          ++outdeg[ed.a];
          gate_in_gate[ed.b].push_back( ed.a );
        }
        else
        {
          ++outdeg[ed.a];
          ++po_driver_count[ed.b];
          po_driver[ed.b] = ed.a;
        }
      }
      bool ok = true;
      for ( auto o = 0u; o < n && ok; ++o )
        ok = po_driver_count[o] == 1u;
      for ( auto o = 0u; o < n && ok; ++o )
        for ( auto p = o + 1u; p < n && ok; ++p )
          ok = po_driver[o] != po_driver[p];
      for ( auto i = 0u; i < m && ok; ++i )
        ok = pi_use[i] > 0u;
      for ( auto g = 0u; g < k && ok; ++g )
        ok = outdeg[g] > 0u && arities.count( indeg[g] );
      if ( !ok )
        continue;
      /* acyclicity of the gate-gate part */
      std::vector<uint32_t> order, deg( k, 0u );
      for ( auto g = 0u; g < k; ++g )
        deg[g] = static_cast<uint32_t>( gate_in_gate[g].size() );
      std::vector<uint32_t> ready;
      for ( auto g = 0u; g < k; ++g )
        if ( deg[g] == 0u )
          ready.push_back( g );
      while ( !ready.empty() )
      {
        auto const g = ready.back();
        ready.pop_back();
        order.push_back( g );
        for ( auto h = 0u; h < k; ++h )
          for ( auto src : gate_in_gate[h] )
            if ( src == g && --deg[h] == 0u )
              ready.push_back( h );
      }
      if ( order.size() != k )
        continue;

      ++res.topologies_tried;
      topology t;
      t.num_nodes = m + k;
      for ( auto i = 0u; i < m; ++i )
        t.chi.push_back( in_names[i] );
      for ( auto g = 0u; g < k; ++g )
        t.chi.push_back( {} );
      for ( auto g = 0u; g < k; ++g )
      {
        for ( auto i : gate_in_pi[g] )
          t.arcs.push_back( {i, 0u, m + g} );
        for ( auto h : gate_in_gate[g] )
          t.arcs.push_back( {m + h, 0u, m + g} );
      }
      for ( auto o = 0u; o < n; ++o )
        t.omega.push_back( {out_names[o], {m + po_driver[o], 0u}} );
      auto const enc = create_miter( closure, t, psi );
      auto const e = enumerate_solutions( enc, psi, 1u, opt );
      if ( e.timed_out )
        throw std::runtime_error( "label selection timed out during exhaustive search" );
      for ( auto const& c : e.circuits )
        res.circuits.push_back( c );
    }
    res.subsets_examined += examined;
    res.subsets_per_size.push_back( examined );
    if ( !res.circuits.empty() )
    {
      res.size = k;
      break;
    }
  }
  return res;
}

} // namespace exsyn
