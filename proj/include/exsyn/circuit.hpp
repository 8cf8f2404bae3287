#pragma once

#include "boolean_function.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace exsyn
{

struct signal
{
  uint32_t node{0};
  uint32_t index{0};

  bool operator==( signal const& o ) const { return node == o.node && index == o.index; }
  bool operator<( signal const& o ) const { return node != o.node ? node < o.node : index < o.index; }
};

struct edge
{
  uint32_t src{0};
  uint32_t src_index{0};
  uint32_t dst{0};
  uint32_t slot{0};

  bool operator==( edge const& o ) const
  {
    return src == o.src && src_index == o.src_index && dst == o.dst && slot == o.slot;
  }
};

struct output_port
{
  std::string name;
  signal driver;

  bool operator==( output_port const& o ) const { return name == o.name && driver == o.driver; }
};

class interface_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class invalid_circuit : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/*! \brief Combinational circuit as a DAG with labelled nodes.
 *
 * A node is a primary input (it carries an input name and no function) or
 * a gate (it carries a function whose arity equals its in-degree).  Primary
 * outputs are markings on driver wires, so several outputs may share one
 * driver and an output may be driven by a primary input directly.
 */
class circuit
{
public:
  struct node_data
  {
    std::optional<boolean_function> fn;
    std::string input_name;
    std::string label;
  };

  uint32_t add_input( std::string name )
  {
    auto const id = add_node( std::nullopt, name );
    return id;
  }

  uint32_t add_gate( boolean_function fn, std::vector<signal> const& fanins, std::string label = {} )
  {
    if ( fanins.size() != fn.num_inputs() )
    {
      throw std::invalid_argument( "gate " + fn.name() + " expects " + std::to_string( fn.num_inputs() ) +
                                   " fanins, got " + std::to_string( fanins.size() ) );
    }
    auto const id = add_node( std::move( fn ), {}, std::move( label ) );
    for ( auto i = 0u; i < fanins.size(); ++i )
    {
      add_edge( fanins[i], id, i );
    }
    return id;
  }

  void add_output( std::string name, signal driver )
  {
    outputs_.push_back( {std::move( name ), driver} );
  }

  /*! \brief Low-level node creation; no consistency checks (see validate). */
  uint32_t add_node( std::optional<boolean_function> fn = std::nullopt, std::string input_name = {}, std::string label = {} )
  {
    auto const id = static_cast<uint32_t>( nodes_.size() );
    bool const is_pi = !fn && !input_name.empty();
    nodes_.push_back( {std::move( fn ), std::move( input_name ), std::move( label )} );
    if ( is_pi )
    {
      inputs_.push_back( id );
    }
    cache_valid_ = false;
    return id;
  }

  /*! \brief Low-level edge creation; no consistency checks (see validate). */
  void add_edge( signal src, uint32_t dst, uint32_t slot )
  {
    edges_.push_back( {src.node, src.index, dst, slot} );
    cache_valid_ = false;
  }

  void set_function( uint32_t node, boolean_function fn )
  {
    nodes_.at( node ).fn = std::move( fn );
  }

  void set_label( uint32_t node, std::string label ) { nodes_.at( node ).label = std::move( label ); }

  std::string const& name() const { return name_; }
  void set_name( std::string name ) { name_ = std::move( name ); }

  uint32_t num_nodes() const { return static_cast<uint32_t>( nodes_.size() ); }
  uint32_t num_inputs() const { return static_cast<uint32_t>( inputs_.size() ); }
  uint32_t num_outputs() const { return static_cast<uint32_t>( outputs_.size() ); }

  /*! \brief Number of nodes carrying a function, constants included. */
  uint32_t num_gates() const
  {
    return static_cast<uint32_t>( std::count_if( nodes_.begin(), nodes_.end(), []( auto const& n ) { return n.fn.has_value(); } ) );
  }

  node_data const& node( uint32_t n ) const { return nodes_.at( n ); }
  std::vector<node_data> const& nodes() const { return nodes_; }
  std::vector<edge> const& edges() const { return edges_; }
  std::vector<uint32_t> const& inputs() const { return inputs_; }
  std::vector<output_port> const& outputs() const { return outputs_; }

  bool is_input( uint32_t n ) const { return !nodes_[n].fn && !nodes_[n].input_name.empty(); }
  bool is_gate( uint32_t n ) const { return nodes_[n].fn.has_value(); }

  std::vector<std::string> input_names() const
  {
    std::vector<std::string> v;
    for ( auto n : inputs_ )
      v.push_back( nodes_[n].input_name );
    return v;
  }

  std::vector<std::string> output_names() const
  {
    std::vector<std::string> v;
    for ( auto const& o : outputs_ )
      v.push_back( o.name );
    return v;
  }

  /*! \brief Fanins of a node ordered by slot; assumes the slots are well formed. */
  std::vector<signal> fanins( uint32_t n ) const
  {
    build_cache();
    return fanins_[n];
  }

  /*! \brief Gate function counts by name. */
  std::map<std::string, uint32_t> gate_histogram() const
  {
    std::map<std::string, uint32_t> h;
    for ( auto const& n : nodes_ )
    {
      if ( n.fn )
        ++h[n.fn->name()];
    }
    return h;
  }

  /*! \brief Topological order of all nodes; throws invalid_circuit on a cycle. */
  std::vector<uint32_t> topological_order() const
  {
    std::vector<uint32_t> indeg( nodes_.size(), 0u );
    std::vector<std::vector<uint32_t>> succ( nodes_.size() );
    for ( auto const& e : edges_ )
    {
      if ( e.src >= nodes_.size() || e.dst >= nodes_.size() )
        throw invalid_circuit( "edge references unknown node" );
      ++indeg[e.dst];
      succ[e.src].push_back( e.dst );
    }
    std::vector<uint32_t> order, stack;
    for ( auto i = 0u; i < nodes_.size(); ++i )
    {
      if ( indeg[i] == 0u )
        stack.push_back( i );
    }
    std::reverse( stack.begin(), stack.end() );
    while ( !stack.empty() )
    {
      auto const n = stack.back();
      stack.pop_back();
      order.push_back( n );
      for ( auto s : succ[n] )
      {
        if ( --indeg[s] == 0u )
          stack.push_back( s );
      }
    }
    if ( order.size() != nodes_.size() )
      throw invalid_circuit( "circuit contains a cycle" );
    return order;
  }

  bool operator==( circuit const& o ) const
  {
    if ( nodes_.size() != o.nodes_.size() || edges_.size() != o.edges_.size() || outputs_ != o.outputs_ || inputs_ != o.inputs_ )
      return false;
    for ( auto i = 0u; i < nodes_.size(); ++i )
    {
      auto const& a = nodes_[i];
      auto const& b = o.nodes_[i];
      if ( a.input_name != b.input_name || a.fn.has_value() != b.fn.has_value() )
        return false;
      if ( a.fn && !( a.fn->same_table( *b.fn ) && a.fn->name() == b.fn->name() ) )
        return false;
    }
    auto sorted = []( std::vector<edge> v ) {
      std::sort( v.begin(), v.end(), []( auto const& x, auto const& y ) {
        return std::tie( x.dst, x.slot, x.src, x.src_index ) < std::tie( y.dst, y.slot, y.src, y.src_index );
      } );
      return v;
    };
    return sorted( edges_ ) == sorted( o.edges_ );
  }

private:
  void build_cache() const
  {
    if ( cache_valid_ )
      return;
    fanins_.assign( nodes_.size(), {} );
    for ( auto const& e : edges_ )
    {
      auto& f = fanins_.at( e.dst );
      if ( f.size() <= e.slot )
        f.resize( e.slot + 1u );
      f[e.slot] = {e.src, e.src_index};
    }
    cache_valid_ = true;
  }

  std::string name_;
  std::vector<node_data> nodes_;
  std::vector<edge> edges_;
  std::vector<uint32_t> inputs_;
  std::vector<output_port> outputs_;
  mutable std::vector<std::vector<signal>> fanins_;
  mutable bool cache_valid_{false};
};

/*! \brief Connection structure of a circuit without function labels or slot numbers. */
struct topology
{
  struct arc
  {
    uint32_t src{0};
    uint32_t src_index{0};
    uint32_t dst{0};
    bool operator==( arc const& o ) const { return src == o.src && src_index == o.src_index && dst == o.dst; }
  };

  uint32_t num_nodes{0};
  std::vector<arc> arcs; /* ordered by target, then by original slot */
  std::vector<std::string> chi; /* input name per node, empty for internal nodes */
  std::vector<output_port> omega;

  std::vector<uint32_t> internal_nodes() const
  {
    std::vector<uint32_t> v;
    for ( auto i = 0u; i < num_nodes; ++i )
    {
      if ( chi[i].empty() )
        v.push_back( i );
    }
    return v;
  }

  std::vector<uint32_t> input_nodes() const
  {
    std::vector<uint32_t> v;
    for ( auto i = 0u; i < num_nodes; ++i )
    {
      if ( !chi[i].empty() )
        v.push_back( i );
    }
    return v;
  }

  std::vector<arc> in_arcs( uint32_t n ) const
  {
    std::vector<arc> v;
    for ( auto const& a : arcs )
    {
      if ( a.dst == n )
        v.push_back( a );
    }
    return v;
  }

  /*! \brief Number of output wires of a node that are referenced anywhere. */
  uint32_t used_outputs( uint32_t n ) const
  {
    uint32_t k = 1;
    for ( auto const& a : arcs )
    {
      if ( a.src == n )
        k = std::max( k, a.src_index + 1u );
    }
    for ( auto const& o : omega )
    {
      if ( o.driver.node == n )
        k = std::max( k, o.driver.index + 1u );
    }
    return k;
  }

  bool operator==( topology const& o ) const
  {
    return num_nodes == o.num_nodes && arcs == o.arcs && chi == o.chi && omega == o.omega;
  }
};

inline topology topology_of( circuit const& c )
{
  topology t;
  t.num_nodes = c.num_nodes();
  auto edges = c.edges();
  std::stable_sort( edges.begin(), edges.end(), []( auto const& a, auto const& b ) {
    return std::tie( a.dst, a.slot ) < std::tie( b.dst, b.slot );
  } );
  for ( auto const& e : edges )
  {
    t.arcs.push_back( {e.src, e.src_index, e.dst} );
  }
  for ( auto const& n : c.nodes() )
  {
    t.chi.push_back( n.fn ? std::string() : n.input_name );
  }
  t.omega = c.outputs();
  return t;
}

/*! \brief Builds a circuit on a topology; slots follow the arc order per node. */
inline circuit wrap_topology( topology const& t, std::vector<std::optional<boolean_function>> const& beta )
{
  circuit c;
  for ( auto i = 0u; i < t.num_nodes; ++i )
  {
    c.add_node( beta.at( i ), t.chi[i] );
  }
  std::vector<uint32_t> next_slot( t.num_nodes, 0u );
  for ( auto const& a : t.arcs )
  {
    c.add_edge( {a.src, a.src_index}, a.dst, next_slot[a.dst]++ );
  }
  for ( auto const& o : t.omega )
  {
    c.add_output( o.name, o.driver );
  }
  return c;
}

struct violation
{
  std::string kind; /* cycle, cond1, cond2, cond3, cond4, slot, wire */
  std::optional<uint32_t> node;
  std::string message;
};

struct validation_report
{
  std::vector<violation> violations;
  bool ok() const { return violations.empty(); }
  bool has( std::string const& kind ) const
  {
    return std::any_of( violations.begin(), violations.end(), [&]( auto const& v ) { return v.kind == kind; } );
  }
};

inline validation_report validate( circuit const& c )
{
  validation_report rep;
  auto add = [&]( std::string kind, std::optional<uint32_t> node, std::string msg ) {
    rep.violations.push_back( {std::move( kind ), node, std::move( msg )} );
  };
  auto const n = c.num_nodes();

  std::vector<std::vector<edge>> in( n );
  bool dangling = false;
  for ( auto const& e : c.edges() )
  {
    if ( e.src >= n || e.dst >= n )
    {
      add( "wire", std::nullopt, "edge references an unknown node" );
      dangling = true;
      continue;
    }
    in[e.dst].push_back( e );
    auto const& src = c.node( e.src );
    uint32_t const width = src.fn ? src.fn->num_outputs() : 1u;
    if ( e.src_index >= width )
    {
      add( "wire", e.src, "node " + std::to_string( e.src ) + " has no output " + std::to_string( e.src_index ) );
    }
  }

  if ( !dangling )
  {
    try
    {
      (void)c.topological_order();
    }
    catch ( invalid_circuit const& )
    {
      add( "cycle", std::nullopt, "the graph contains a cycle" );
    }
  }

  for ( auto i = 0u; i < n; ++i )
  {
    auto const& nd = c.node( i );
    auto const k = static_cast<uint32_t>( in[i].size() );
    if ( k == 0u )
    {
      if ( !nd.fn && nd.input_name.empty() )
        add( "cond1", i, "node " + std::to_string( i ) + " has no fanin and is neither an input nor a constant" );
      else if ( nd.fn && nd.fn->num_inputs() != 0u )
        add( "cond2", i, "node " + std::to_string( i ) + " carries a " + std::to_string( nd.fn->num_inputs() ) + "-ary function but has no fanin" );
      if ( nd.fn && !nd.input_name.empty() )
        add( "cond3", i, "node " + std::to_string( i ) + " is both a gate and an input" );
      continue;
    }
    if ( !nd.fn )
    {
      add( "cond2", i, "node " + std::to_string( i ) + " has fanin but no function" );
      continue;
    }
    if ( nd.fn->num_inputs() != k )
    {
      add( "cond2", i, "node " + std::to_string( i ) + " has in-degree " + std::to_string( k ) + " but a " + std::to_string( nd.fn->num_inputs() ) + "-ary function" );
    }
    std::vector<bool> seen( k, false );
    for ( auto const& e : in[i] )
    {
      if ( e.slot >= k || seen[e.slot] )
      {
        add( "slot", i, "node " + std::to_string( i ) + " has a duplicate or out-of-range slot " + std::to_string( e.slot ) );
        continue;
      }
      seen[e.slot] = true;
    }
  }

  std::map<std::string, uint32_t> pi_count;
  for ( auto i = 0u; i < n; ++i )
  {
    if ( !c.node( i ).input_name.empty() && ++pi_count[c.node( i ).input_name] == 2u )
      add( "cond3", i, "input name " + c.node( i ).input_name + " labels more than one node" );
  }
  std::map<std::string, uint32_t> po_count;
  for ( auto const& o : c.outputs() )
  {
    if ( ++po_count[o.name] == 2u )
      add( "cond4", o.driver.node, "output name " + o.name + " labels more than one wire" );
    if ( o.driver.node >= n )
    {
      add( "cond4", std::nullopt, "output " + o.name + " is driven by an unknown node" );
      continue;
    }
    auto const& d = c.node( o.driver.node );
    uint32_t const width = d.fn ? d.fn->num_outputs() : 1u;
    if ( o.driver.index >= width || ( !d.fn && d.input_name.empty() ) )
      add( "cond4", o.driver.node, "output " + o.name + " is driven by a missing wire" );
  }
  return rep;
}

namespace detail
{

inline uint64_t input_word( uint32_t num_inputs, uint32_t index, uint64_t word )
{
  static constexpr uint64_t masks[6] = {0xaaaaaaaaaaaaaaaaull, 0xccccccccccccccccull, 0xf0f0f0f0f0f0f0f0ull,
                                        0xff00ff00ff00ff00ull, 0xffff0000ffff0000ull, 0xffffffff00000000ull};
  auto const s = num_inputs - 1u - index;
  if ( s < 6u )
    return masks[s];
  return ( ( ( word << 6 ) >> s ) & 1u ) ? ~uint64_t( 0 ) : uint64_t( 0 );
}

/*! \brief Bit-parallel evaluation of one function output. */
inline uint64_t apply_word( boolean_function const& f, uint32_t out, std::vector<uint64_t> const& in )
{
  auto const m = f.num_inputs();
  uint64_t ones = 0;
  for ( uint64_t r = 0; r < f.num_rows(); ++r )
    ones += f.get( r, out );
  bool const complement = ones * 2u > f.num_rows();
  uint64_t res = 0;
  for ( uint64_t r = 0; r < f.num_rows(); ++r )
  {
    if ( f.get( r, out ) == complement )
      continue;
    uint64_t t = ~uint64_t( 0 );
    for ( uint32_t i = 0; i < m; ++i )
    {
      t &= boolean_function::input_bit( r, m, i ) ? in[i] : ~in[i];
    }
    res |= t;
  }
  return complement ? ~res : res;
}

/*! \brief Simulates 64 input patterns at once; returns one word per output port. */
struct simulator
{
  explicit simulator( circuit const& c ) : c_( c ), order_( c.topological_order() )
  {
    auto const rep = validate( c );
    if ( !rep.ok() )
      throw invalid_circuit( "invalid circuit: " + rep.violations.front().message );
    pi_pos_.assign( c.num_nodes(), -1 );
    for ( auto i = 0u; i < c.num_inputs(); ++i )
      pi_pos_[c.inputs()[i]] = static_cast<int>( i );
    fanins_.resize( c.num_nodes() );
    for ( auto i = 0u; i < c.num_nodes(); ++i )
      fanins_[i] = c.fanins( i );
    values_.resize( c.num_nodes() );
  }

  std::vector<uint64_t> run( std::vector<uint64_t> const& pi_words )
  {
    std::vector<uint64_t> in;
    for ( auto n : order_ )
    {
      auto const& nd = c_.node( n );
      if ( !nd.fn )
      {
        values_[n].assign( 1u, pi_words.at( pi_pos_[n] ) );
        continue;
      }
      in.clear();
      for ( auto const& s : fanins_[n] )
        in.push_back( values_[s.node][s.index] );
      values_[n].resize( nd.fn->num_outputs() );
      for ( auto o = 0u; o < nd.fn->num_outputs(); ++o )
        values_[n][o] = apply_word( *nd.fn, o, in );
    }
    std::vector<uint64_t> out;
    for ( auto const& o : c_.outputs() )
      out.push_back( values_[o.driver.node][o.driver.index] );
    return out;
  }

  circuit const& c_;
  std::vector<uint32_t> order_;
  std::vector<int> pi_pos_;
  std::vector<std::vector<signal>> fanins_;
  std::vector<std::vector<uint64_t>> values_;
};

} // namespace detail

/*! \brief Evaluates the circuit on one input assignment given by name. */
inline std::map<std::string, bool> evaluate( circuit const& c, std::map<std::string, bool> const& inputs )
{
  detail::simulator sim( c );
  std::vector<uint64_t> words;
  for ( auto n : c.inputs() )
  {
    auto it = inputs.find( c.node( n ).input_name );
    if ( it == inputs.end() )
      throw std::invalid_argument( "missing value for input " + c.node( n ).input_name );
    words.push_back( it->second ? 1u : 0u );
  }
  auto const out = sim.run( words );
  std::map<std::string, bool> res;
  for ( auto i = 0u; i < c.num_outputs(); ++i )
    res[c.outputs()[i].name] = out[i] & 1u;
  return res;
}

/*! \brief Evaluates the circuit on positional input bits (declaration order). */
inline std::vector<bool> evaluate( circuit const& c, std::vector<bool> const& inputs )
{
  if ( inputs.size() != c.num_inputs() )
    throw std::invalid_argument( "wrong number of input values" );
  detail::simulator sim( c );
  std::vector<uint64_t> words;
  for ( auto b : inputs )
    words.push_back( b ? 1u : 0u );
  auto const out = sim.run( words );
  std::vector<bool> res;
  for ( auto w : out )
    res.push_back( w & 1u );
  return res;
}

constexpr uint32_t default_truth_table_cap = 20u;

/*! \brief Exhaustive simulation; output j of the result is output port j. */
inline boolean_function truth_table( circuit const& c, uint32_t cap = default_truth_table_cap )
{
  auto const m = c.num_inputs();
  if ( m > cap )
    throw std::invalid_argument( "circuit has " + std::to_string( m ) + " inputs, truth table cap is " + std::to_string( cap ) );
  if ( c.num_outputs() == 0u )
    throw std::invalid_argument( "circuit has no outputs" );
  detail::simulator sim( c );
  boolean_function f( c.name(), m, c.num_outputs() );
  auto const rows = uint64_t( 1 ) << m;
  auto const words = ( rows + 63u ) / 64u;
  std::vector<uint64_t> in( m );
  for ( uint64_t w = 0; w < words; ++w )
  {
    for ( auto i = 0u; i < m; ++i )
      in[i] = detail::input_word( m, i, w );
    auto const out = sim.run( in );
    for ( auto o = 0u; o < out.size(); ++o )
    {
      for ( uint64_t b = 0; b < 64u && w * 64u + b < rows; ++b )
      {
        if ( ( out[o] >> b ) & 1u )
          f.set( w * 64u + b, o, true );
      }
    }
  }
  return f;
}

/*! \brief How the ports of two circuits are paired for comparison. */
struct port_pairing
{
  std::vector<uint32_t> input_perm;  /* input i of a pairs with input input_perm[i] of b */
  std::vector<uint32_t> output_perm; /* output j of a pairs with output output_perm[j] of b */
  bool by_name{true};
};

/*! \brief Pairs ports by name; if the name sets differ and `allow_positional`, by declaration order. */
inline port_pairing pair_ports( circuit const& a, circuit const& b, bool allow_positional )
{
  port_pairing p;
  auto match = []( std::vector<std::string> const& x, std::vector<std::string> const& y, std::vector<uint32_t>& perm ) {
    if ( x.size() != y.size() )
      return false;
    if ( std::set<std::string>( x.begin(), x.end() ).size() != x.size() )
      return false;
    std::map<std::string, uint32_t> pos;
    for ( auto i = 0u; i < y.size(); ++i )
      pos[y[i]] = i;
    perm.clear();
    for ( auto const& n : x )
    {
      auto it = pos.find( n );
      if ( it == pos.end() )
        return false;
      perm.push_back( it->second );
    }
    return true;
  };
  if ( match( a.input_names(), b.input_names(), p.input_perm ) && match( a.output_names(), b.output_names(), p.output_perm ) )
    return p;
  if ( !allow_positional || a.num_inputs() != b.num_inputs() || a.num_outputs() != b.num_outputs() )
    throw interface_error( "circuits have different interfaces" );
  p.by_name = false;
  p.input_perm.resize( a.num_inputs() );
  p.output_perm.resize( a.num_outputs() );
  for ( auto i = 0u; i < a.num_inputs(); ++i )
    p.input_perm[i] = i;
  for ( auto j = 0u; j < a.num_outputs(); ++j )
    p.output_perm[j] = j;
  return p;
}

/*! \brief First input vector (in a's input order) on which the circuits differ. */
inline std::optional<std::vector<bool>> first_difference( circuit const& a, circuit const& b, port_pairing const& p,
                                                          uint32_t cap = default_truth_table_cap )
{
  auto const m = a.num_inputs();
  if ( m > cap )
    throw std::invalid_argument( "too many inputs for exhaustive comparison" );
  detail::simulator sa( a ), sb( b );
  auto const rows = uint64_t( 1 ) << m;
  auto const words = ( rows + 63u ) / 64u;
  std::vector<uint64_t> ina( m ), inb( m );
  for ( uint64_t w = 0; w < words; ++w )
  {
    for ( auto i = 0u; i < m; ++i )
    {
      ina[i] = detail::input_word( m, i, w );
      inb[p.input_perm[i]] = ina[i];
    }
    auto const oa = sa.run( ina );
    auto const ob = sb.run( inb );
    uint64_t diff = 0;
    for ( auto j = 0u; j < oa.size(); ++j )
      diff |= oa[j] ^ ob[p.output_perm[j]];
    if ( rows < 64u )
      diff &= ( uint64_t( 1 ) << rows ) - 1u;
    if ( diff )
    {
      auto const row = w * 64u + static_cast<uint64_t>( __builtin_ctzll( diff ) );
      std::vector<bool> v( m );
      for ( auto i = 0u; i < m; ++i )
        v[i] = boolean_function::input_bit( row, m, i );
      return v;
    }
  }
  return std::nullopt;
}

/*! \brief Truth-table equivalence; ports are matched by name. */
inline bool equivalent_bruteforce( circuit const& a, circuit const& b, uint32_t cap = default_truth_table_cap )
{
  auto const p = pair_ports( a, b, false );
  return !first_difference( a, b, p, cap ).has_value();
}

} // namespace exsyn
