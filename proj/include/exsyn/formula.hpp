#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace exsyn
{

using var = uint32_t; /* 1-based */
using lit = int32_t;  /* DIMACS convention: v or -v */

inline var var_of( lit l ) { return static_cast<var>( std::abs( l ) ); }

struct cnf
{
  uint32_t num_vars{0};
  std::vector<std::vector<lit>> clauses;

  var new_var() { return ++num_vars; }

  /*! \brief Adds a clause; duplicates are merged and tautologies are dropped (returns false). */
  bool add_clause( std::vector<lit> c )
  {
    std::sort( c.begin(), c.end(), []( lit a, lit b ) { return std::abs( a ) != std::abs( b ) ? std::abs( a ) < std::abs( b ) : a < b; } );
    c.erase( std::unique( c.begin(), c.end() ), c.end() );
    for ( auto i = 1u; i < c.size(); ++i )
    {
      if ( c[i] == -c[i - 1u] )
        return false;
    }
    for ( auto l : c )
    {
      if ( l == 0 )
        throw std::invalid_argument( "literal 0 in clause" );
      num_vars = std::max( num_vars, var_of( l ) );
    }
    clauses.push_back( std::move( c ) );
    return true;
  }

  bool satisfied_by( std::vector<bool> const& model ) const
  {
    for ( auto const& c : clauses )
    {
      bool sat = false;
      for ( auto l : c )
      {
        if ( var_of( l ) < model.size() && model[var_of( l )] == ( l > 0 ) )
        {
          sat = true;
          break;
        }
      }
      if ( !sat )
        return false;
    }
    return true;
  }
};

enum class gate_kind : uint8_t
{
  variable,
  constant,
  and_,
  or_,
  not_,
  xor_,
  xnor_,
  mux /* fanins (s, t, e): s ? t : e */
};

/*! \brief Structurally hashed propositional DAG.
 *
 * Node ids are created in topological order.  The `make_*` builders fold
 * constants and trivial cases; `add_raw` creates a node verbatim.
 */
class gate_graph
{
public:
  using node_id = uint32_t;

  struct node
  {
    gate_kind kind;
    uint32_t data{0}; /* variable id or constant value */
    std::vector<node_id> fanins;
  };

  node_id constant( bool value ) { return intern( gate_kind::constant, value ? 1u : 0u, {} ); }
  node_id variable( var v ) { return intern( gate_kind::variable, v, {} ); }

  node_id add_raw( gate_kind kind, std::vector<node_id> fanins, uint32_t data = 0u )
  {
    return intern( kind, data, std::move( fanins ) );
  }

  node_id make_not( node_id a )
  {
    auto const& n = nodes_[a];
    if ( n.kind == gate_kind::constant )
      return constant( !n.data );
    if ( n.kind == gate_kind::not_ )
      return n.fanins[0];
    return intern( gate_kind::not_, 0u, {a} );
  }

  node_id make_and( std::vector<node_id> in ) { return make_nary( gate_kind::and_, std::move( in ) ); }
  node_id make_or( std::vector<node_id> in ) { return make_nary( gate_kind::or_, std::move( in ) ); }
  node_id make_and( node_id a, node_id b ) { return make_and( std::vector<node_id>{a, b} ); }
  node_id make_or( node_id a, node_id b ) { return make_or( std::vector<node_id>{a, b} ); }

  node_id make_xor( node_id a, node_id b ) { return make_parity( a, b, false ); }
  node_id make_xnor( node_id a, node_id b ) { return make_parity( a, b, true ); }

  node_id make_mux( node_id s, node_id t, node_id e )
  {
    if ( is_const( s ) )
      return const_value( s ) ? t : e;
    if ( t == e )
      return t;
    if ( is_const( t ) && is_const( e ) )
      return const_value( t ) ? s : make_not( s );
    if ( is_const( t ) )
      return const_value( t ) ? make_or( s, e ) : make_and( make_not( s ), e );
    if ( is_const( e ) )
      return const_value( e ) ? make_or( make_not( s ), t ) : make_and( s, t );
    if ( t == s )
      return make_or( s, e );
    if ( e == s )
      return make_and( s, t );
    if ( complementary( t, e ) )
      return make_xor( s, e );
    return intern( gate_kind::mux, 0u, {s, t, e} );
  }

  /*! \brief Builds a node of the given kind through the folding builders. */
  node_id make( gate_kind kind, std::vector<node_id> const& in, uint32_t data = 0u )
  {
    switch ( kind )
    {
    case gate_kind::variable:
      return variable( data );
    case gate_kind::constant:
      return constant( data != 0u );
    case gate_kind::and_:
      return make_and( in );
    case gate_kind::or_:
      return make_or( in );
    case gate_kind::not_:
      return make_not( in.at( 0 ) );
    case gate_kind::xor_:
    case gate_kind::xnor_:
    {
      if ( in.empty() )
        return constant( kind == gate_kind::xnor_ );
      auto acc = in[0];
      for ( auto i = 1u; i < in.size(); ++i )
        acc = make_xor( acc, in[i] );
      return kind == gate_kind::xnor_ ? make_not( acc ) : acc;
    }
    case gate_kind::mux:
      return make_mux( in.at( 0 ), in.at( 1 ), in.at( 2 ) );
    }
    throw std::logic_error( "unknown gate kind" );
  }

  bool is_const( node_id n ) const { return nodes_[n].kind == gate_kind::constant; }
  bool const_value( node_id n ) const { return nodes_[n].data != 0u; }

  std::vector<node>& nodes() { return nodes_; }
  std::vector<node> const& nodes() const { return nodes_; }
  uint32_t size() const { return static_cast<uint32_t>( nodes_.size() ); }
  node const& at( node_id n ) const { return nodes_.at( n ); }

  node_id root() const { return root_; }
  void set_root( node_id r ) { root_ = r; }
  bool has_root() const { return !nodes_.empty(); }

  /*! \brief Values of all nodes under a total assignment of the leaf variables. */
  std::vector<bool> simulate( std::function<bool( var )> const& value ) const
  {
    std::vector<bool> v( nodes_.size() );
    for ( auto i = 0u; i < nodes_.size(); ++i )
    {
      auto const& n = nodes_[i];
      switch ( n.kind )
      {
      case gate_kind::variable:
        v[i] = value( n.data );
        break;
      case gate_kind::constant:
        v[i] = n.data != 0u;
        break;
      case gate_kind::and_:
        v[i] = std::all_of( n.fanins.begin(), n.fanins.end(), [&]( auto f ) { return bool( v[f] ); } );
        break;
      case gate_kind::or_:
        v[i] = std::any_of( n.fanins.begin(), n.fanins.end(), [&]( auto f ) { return bool( v[f] ); } );
        break;
      case gate_kind::not_:
        v[i] = !v[n.fanins[0]];
        break;
      case gate_kind::xor_:
      case gate_kind::xnor_:
      {
        bool p = n.kind == gate_kind::xnor_;
        for ( auto f : n.fanins )
          p ^= bool( v[f] );
        v[i] = p;
        break;
      }
      case gate_kind::mux:
        v[i] = v[n.fanins[0]] ? v[n.fanins[1]] : v[n.fanins[2]];
        break;
      }
    }
    return v;
  }

  bool evaluate( std::function<bool( var )> const& value ) const { return simulate( value )[root_]; }

  /*! \brief Leaf variables in the cone of the root. */
  std::set<var> support() const
  {
    std::set<var> s;
    if ( nodes_.empty() )
      return s;
    std::vector<bool> seen( nodes_.size(), false );
    std::vector<node_id> stack{root_};
    while ( !stack.empty() )
    {
      auto n = stack.back();
      stack.pop_back();
      if ( seen[n] )
        continue;
      seen[n] = true;
      if ( nodes_[n].kind == gate_kind::variable )
        s.insert( nodes_[n].data );
      for ( auto f : nodes_[n].fanins )
        stack.push_back( f );
    }
    return s;
  }

  /*! \brief Nodes in the cone of the root, in topological order. */
  std::vector<node_id> cone() const
  {
    std::vector<bool> seen( nodes_.size(), false );
    if ( nodes_.empty() )
      return {};
    seen[root_] = true;
    for ( auto i = root_ + 1u; i-- > 0u; )
    {
      if ( !seen[i] )
        continue;
      for ( auto f : nodes_[i].fanins )
        seen[f] = true;
    }
    std::vector<node_id> v;
    for ( auto i = 0u; i <= root_; ++i )
    {
      if ( seen[i] )
        v.push_back( i );
    }
    return v;
  }

private:
  struct key_hash
  {
    size_t operator()( std::vector<uint32_t> const& k ) const
    {
      size_t h = 1469598103934665603ull;
      for ( auto x : k )
        h = ( h ^ x ) * 1099511628211ull;
      return h;
    }
  };

  node_id intern( gate_kind kind, uint32_t data, std::vector<node_id> fanins )
  {
    for ( auto f : fanins )
    {
      if ( f >= nodes_.size() )
        throw std::invalid_argument( "fanin refers to a node that does not exist yet" );
    }
    std::vector<uint32_t> key;
    key.reserve( fanins.size() + 2u );
    key.push_back( static_cast<uint32_t>( kind ) );
    key.push_back( data );
    key.insert( key.end(), fanins.begin(), fanins.end() );
    if ( auto it = hash_.find( key ); it != hash_.end() )
      return it->second;
    auto const id = static_cast<node_id>( nodes_.size() );
    nodes_.push_back( {kind, data, std::move( fanins )} );
    hash_.emplace( std::move( key ), id );
    root_ = id;
    return id;
  }

  bool complementary( node_id a, node_id b ) const
  {
    return ( nodes_[a].kind == gate_kind::not_ && nodes_[a].fanins[0] == b ) ||
           ( nodes_[b].kind == gate_kind::not_ && nodes_[b].fanins[0] == a );
  }

  node_id make_nary( gate_kind kind, std::vector<node_id> in )
  {
    bool const is_and = kind == gate_kind::and_;
    std::vector<node_id> kept;
    for ( auto f : in )
    {
      if ( is_const( f ) )
      {
        if ( const_value( f ) == is_and )
          continue;
        return constant( !is_and );
      }
      kept.push_back( f );
    }
    std::sort( kept.begin(), kept.end() );
    kept.erase( std::unique( kept.begin(), kept.end() ), kept.end() );
    for ( auto f : kept )
    {
      if ( nodes_[f].kind == gate_kind::not_ && std::binary_search( kept.begin(), kept.end(), nodes_[f].fanins[0] ) )
        return constant( !is_and );
    }
    if ( kept.empty() )
      return constant( is_and );
    if ( kept.size() == 1u )
      return kept[0];
    return intern( kind, 0u, std::move( kept ) );
  }

  node_id make_parity( node_id a, node_id b, bool negate )
  {
    if ( is_const( a ) )
      std::swap( a, b );
    if ( is_const( b ) )
      return ( const_value( b ) != negate ) ? make_not( a ) : a;
    if ( a == b )
      return constant( negate );
    if ( complementary( a, b ) )
      return constant( !negate );
    if ( a > b )
      std::swap( a, b );
    return intern( negate ? gate_kind::xnor_ : gate_kind::xor_, 0u, {a, b} );
  }

  std::vector<node> nodes_;
  std::unordered_map<std::vector<uint32_t>, node_id, key_hash> hash_;
  node_id root_{0};
};

/*! \brief Substitutes fixed variables and propagates constants through the root cone. */
inline gate_graph constant_fold( gate_graph const& g, std::map<var, bool> const& fixed = {} )
{
  gate_graph r;
  if ( g.size() == 0u )
    return r;
  std::vector<gate_graph::node_id> map( g.size(), 0u );
  for ( auto n : g.cone() )
  {
    auto const& nd = g.at( n );
    if ( nd.kind == gate_kind::variable )
    {
      auto it = fixed.find( nd.data );
      map[n] = it == fixed.end() ? r.variable( nd.data ) : r.constant( it->second );
      continue;
    }
    std::vector<gate_graph::node_id> in;
    for ( auto f : nd.fanins )
      in.push_back( map[f] );
    map[n] = r.make( nd.kind, in, nd.data );
  }
  r.set_root( map[g.root()] );
  return r;
}

struct tseitin_result
{
  cnf formula;
  std::vector<lit> node_lit; /* 0 for constants and nodes outside the root cone */
};

namespace detail
{

/*! \brief Literal-level clause emitter shared by Tseitin and expansion. */
struct clause_emitter
{
  static constexpr lit lit_true = 0x7fffffff;
  static constexpr lit lit_false = -0x7fffffff;

  cnf& out;
  std::function<var()> fresh;
  /* optional structural cache: identical gates over identical literals share one variable */
  std::map<std::vector<lit>, lit>* cache{nullptr};

  static bool is_const( lit l ) { return l == lit_true || l == lit_false; }

  lit* lookup( std::vector<lit> const& key )
  {
    if ( !cache )
      return nullptr;
    auto it = cache->find( key );
    return it == cache->end() ? nullptr : &it->second;
  }

  void remember( std::vector<lit> key, lit l )
  {
    if ( cache )
      cache->emplace( std::move( key ), l );
  }

  lit emit( gate_kind kind, std::vector<lit> in )
  {
    switch ( kind )
    {
    case gate_kind::not_:
      return -in[0];
    case gate_kind::and_:
    case gate_kind::or_:
    {
      bool const is_and = kind == gate_kind::and_;
      std::vector<lit> kept;
      for ( auto l : in )
      {
        if ( is_const( l ) )
        {
          if ( ( l == lit_true ) == is_and )
            continue;
          return is_and ? lit_false : lit_true;
        }
        kept.push_back( l );
      }
      std::sort( kept.begin(), kept.end() );
      kept.erase( std::unique( kept.begin(), kept.end() ), kept.end() );
      for ( auto l : kept )
      {
        if ( std::binary_search( kept.begin(), kept.end(), -l ) )
          return is_and ? lit_false : lit_true;
      }
      if ( kept.empty() )
        return is_and ? lit_true : lit_false;
      if ( kept.size() == 1u )
        return kept[0];
      std::vector<lit> key{static_cast<lit>( kind )};
      key.insert( key.end(), kept.begin(), kept.end() );
      if ( auto const* hit = lookup( key ) )
        return *hit;
      lit const g = static_cast<lit>( fresh() );
      remember( std::move( key ), g );
      /* OR is AND over negated inputs with a negated output */
      lit const o = is_and ? g : -g;
      std::vector<lit> big{o};
      for ( auto l : kept )
      {
        lit const li = is_and ? l : -l;
        out.add_clause( {-o, li} );
        big.push_back( -li );
      }
      out.add_clause( big );
      return g;
    }
    case gate_kind::xor_:
    case gate_kind::xnor_:
    {
      bool neg = kind == gate_kind::xnor_;
      std::vector<lit> kept;
      for ( auto l : in )
      {
        if ( is_const( l ) )
        {
          neg ^= l == lit_true;
          continue;
        }
        kept.push_back( l );
      }
      if ( kept.empty() )
        return neg ? lit_true : lit_false;
      lit acc = kept[0];
      for ( auto i = 1u; i < kept.size(); ++i )
      {
        auto const b = kept[i];
        if ( acc == b )
        {
          acc = lit_false;
        }
        else if ( acc == -b )
        {
          acc = lit_true;
        }
        else if ( is_const( acc ) )
        {
          acc = acc == lit_true ? -b : b;
        }
        else if ( auto const* hit = lookup( {static_cast<lit>( gate_kind::xor_ ), std::min( acc, b ), std::max( acc, b )} ) )
        {
          acc = *hit;
        }
        else
        {
          lit const g = static_cast<lit>( fresh() );
          remember( {static_cast<lit>( gate_kind::xor_ ), std::min( acc, b ), std::max( acc, b )}, g );
          out.add_clause( {-g, acc, b} );
          out.add_clause( {-g, -acc, -b} );
          out.add_clause( {g, -acc, b} );
          out.add_clause( {g, acc, -b} );
          acc = g;
        }
      }
      if ( is_const( acc ) )
        return ( acc == lit_true ) != neg ? lit_true : lit_false;
      return neg ? -acc : acc;
    }
    case gate_kind::mux:
    {
      auto const s = in[0], t = in[1], e = in[2];
      if ( is_const( s ) )
        return s == lit_true ? t : e;
      if ( t == e )
        return t;
      if ( is_const( t ) && is_const( e ) )
        return t == lit_true ? s : -s;
      if ( is_const( t ) )
        return t == lit_true ? emit( gate_kind::or_, {s, e} ) : emit( gate_kind::and_, {-s, e} );
      if ( is_const( e ) )
        return e == lit_true ? emit( gate_kind::or_, {-s, t} ) : emit( gate_kind::and_, {s, t} );
      if ( t == -e )
        return emit( gate_kind::xor_, {s, e} );
      if ( auto const* hit = lookup( {static_cast<lit>( gate_kind::mux ), s, t, e} ) )
        return *hit;
      lit const g = static_cast<lit>( fresh() );
      remember( {static_cast<lit>( gate_kind::mux ), s, t, e}, g );
      out.add_clause( {-g, -s, t} );
      out.add_clause( {-g, s, e} );
      out.add_clause( {g, -s, -t} );
      out.add_clause( {g, s, -e} );
      out.add_clause( {-g, t, e} );
      out.add_clause( {g, -t, -e} );
      return g;
    }
    default:
      throw std::logic_error( "emit called on a leaf" );
    }
  }

  void assert_lit( lit l )
  {
    if ( l == lit_true )
      return;
    if ( l == lit_false )
    {
      out.clauses.push_back( {} );
      return;
    }
    out.add_clause( {l} );
  }
};

} // namespace detail

/*! \brief Definitional CNF of the root cone with the root asserted true.
 *
 * Leaf variables keep their ids; gate nodes get fresh ids above every leaf
 * id.  Constants are absorbed rather than given variables.
 */
inline tseitin_result tseitin( gate_graph const& g )
{
  tseitin_result r;
  r.node_lit.assign( g.size(), 0 );
  if ( g.size() == 0u )
    return r;
  var max_leaf = 0;
  for ( auto const& n : g.nodes() )
  {
    if ( n.kind == gate_kind::variable )
      max_leaf = std::max( max_leaf, n.data );
  }
  r.formula.num_vars = max_leaf;
  detail::clause_emitter em{r.formula, [&]() { return r.formula.new_var(); }};
  std::vector<lit> val( g.size(), 0 );
  for ( auto n : g.cone() )
  {
    auto const& nd = g.at( n );
    if ( nd.kind == gate_kind::variable )
      val[n] = static_cast<lit>( nd.data );
    else if ( nd.kind == gate_kind::constant )
      val[n] = nd.data ? em.lit_true : em.lit_false;
    else
    {
      std::vector<lit> in;
      for ( auto f : nd.fanins )
        in.push_back( val[f] );
      val[n] = em.emit( nd.kind, in );
    }
    if ( !em.is_const( val[n] ) )
      r.node_lit[n] = val[n];
  }
  em.assert_lit( val[g.root()] );
  return r;
}

enum class quantifier : uint8_t
{
  exists,
  forall
};

using matrix_t = std::variant<gate_graph, cnf>;

/*! \brief Two-block formula: exists S, forall X, exists Z over a matrix. */
struct qbf2
{
  std::vector<var> S;
  std::vector<var> X;
  std::vector<var> Z; /* explicit inner variables; gate-graph internal nodes are implicit */
  matrix_t matrix;

  bool is_cnf() const { return std::holds_alternative<cnf>( matrix ); }
  gate_graph const& graph() const { return std::get<gate_graph>( matrix ); }
  gate_graph& graph() { return std::get<gate_graph>( matrix ); }
  cnf const& clauses() const { return std::get<cnf>( matrix ); }
  cnf& clauses() { return std::get<cnf>( matrix ); }

  std::set<var> matrix_vars() const
  {
    if ( !is_cnf() )
      return graph().support();
    std::set<var> s;
    for ( auto const& c : clauses().clauses )
      for ( auto l : c )
        s.insert( var_of( l ) );
    return s;
  }

  /*! \brief Throws if the blocks overlap or do not cover the matrix variables. */
  void check() const
  {
    std::set<var> all;
    for ( auto const* blk : {&S, &X, &Z} )
    {
      for ( auto v : *blk )
      {
        if ( v == 0u || !all.insert( v ).second )
          throw std::invalid_argument( "quantifier blocks overlap or contain variable 0" );
      }
    }
    for ( auto v : matrix_vars() )
    {
      if ( !all.count( v ) )
        throw std::invalid_argument( "matrix variable " + std::to_string( v ) + " is not quantified" );
    }
  }
};

struct general_qbf
{
  std::vector<std::pair<quantifier, var>> prefix;
  matrix_t matrix;
};

inline general_qbf to_general( qbf2 const& q )
{
  general_qbf g;
  for ( auto v : q.S )
    g.prefix.emplace_back( quantifier::exists, v );
  for ( auto v : q.X )
    g.prefix.emplace_back( quantifier::forall, v );
  for ( auto v : q.Z )
    g.prefix.emplace_back( quantifier::exists, v );
  g.matrix = q.matrix;
  return g;
}

constexpr uint32_t recursive_eval_cap = 24u;

/*! \brief Truth value by expanding the outermost quantifier first. */
inline bool eval_qbf_recursive( general_qbf const& q, uint32_t cap = recursive_eval_cap )
{
  if ( q.prefix.size() > cap )
    throw std::invalid_argument( "too many variables for recursive evaluation" );
  var max_var = 0;
  for ( auto const& [qt, v] : q.prefix )
    max_var = std::max( max_var, v );
  std::vector<bool> bound( max_var + 1u, false );
  for ( auto const& [qt, v] : q.prefix )
    bound[v] = true;

  std::set<var> free_vars;
  if ( auto const* g = std::get_if<gate_graph>( &q.matrix ) )
    free_vars = g->support();
  else
    for ( auto const& c : std::get<cnf>( q.matrix ).clauses )
      for ( auto l : c )
        free_vars.insert( var_of( l ) );
  for ( auto v : free_vars )
  {
    if ( v > max_var || !bound[v] )
      throw std::invalid_argument( "variable " + std::to_string( v ) + " is free" );
  }

  std::vector<bool> value( max_var + 1u, false );
  auto leaf = [&]() {
    if ( auto const* g = std::get_if<gate_graph>( &q.matrix ) )
      return g->size() == 0u || g->evaluate( [&]( var v ) { return bool( value[v] ); } );
    for ( auto const& c : std::get<cnf>( q.matrix ).clauses )
    {
      if ( std::none_of( c.begin(), c.end(), [&]( lit l ) { return value[var_of( l )] == ( l > 0 ); } ) )
        return false;
    }
    return true;
  };
  std::function<bool( uint32_t )> rec = [&]( uint32_t depth ) -> bool {
    if ( depth == q.prefix.size() )
      return leaf();
    auto const [qt, v] = q.prefix[depth];
    value[v] = false;
    bool const a = rec( depth + 1u );
    if ( qt == quantifier::exists && a )
      return true;
    if ( qt == quantifier::forall && !a )
      return false;
    value[v] = true;
    return rec( depth + 1u );
  };
  return rec( 0u );
}

constexpr uint32_t expansion_cap = 16u;

struct expansion
{
  cnf formula;
  std::vector<var> s_vars; /* s_vars[i] is the CNF variable of S[i] */
  uint64_t copies{0};
  uint32_t shared_nodes{0};
};

/*! \brief Expands the universal block into 2^|X| folded copies sharing S.
 *
 * Variable numbering before compaction: S[i] -> i+1, then gate nodes whose
 * support lies inside S (identical in every copy, emitted once), then copy c
 * of inner variable z -> base + c*|Z| + index(z), where Z lists the explicit
 * inner variables followed by the remaining gate nodes.  Unused ids are
 * compacted away at the end, preserving order.
 */
inline expansion expand_universal( qbf2 const& q, uint32_t cap = expansion_cap )
{
  q.check();
  if ( q.X.size() > cap )
    throw std::invalid_argument( "universal block has " + std::to_string( q.X.size() ) + " variables, cap is " + std::to_string( cap ) );

  expansion ex;
  ex.copies = uint64_t( 1 ) << q.X.size();
  std::unordered_map<var, uint32_t> s_idx, x_idx, z_idx;
  for ( auto i = 0u; i < q.S.size(); ++i )
    s_idx[q.S[i]] = i;
  for ( auto i = 0u; i < q.X.size(); ++i )
    x_idx[q.X[i]] = i;
  for ( auto i = 0u; i < q.Z.size(); ++i )
    z_idx[q.Z[i]] = i;

  cnf raw;
  std::vector<std::vector<lit>>& out = raw.clauses;
  auto const nS = static_cast<uint64_t>( q.S.size() );
  auto x_value = []( uint64_t copy, uint32_t i, uint32_t nx ) { return bool( ( copy >> ( nx - 1u - i ) ) & 1u ); };
  auto const nx = static_cast<uint32_t>( q.X.size() );

  uint64_t max_id = nS;
  if ( q.is_cnf() )
  {
    auto const nz = static_cast<uint64_t>( q.Z.size() );
    auto const base = nS + 1u;
    std::set<std::vector<lit>> shared_seen;
    for ( uint64_t copy = 0; copy < ex.copies; ++copy )
    {
      for ( auto const& c : q.clauses().clauses )
      {
        std::vector<lit> nc;
        bool sat = false, has_z = false, has_x = false;
        for ( auto l : c )
        {
          auto const v = var_of( l );
          if ( auto it = x_idx.find( v ); it != x_idx.end() )
          {
            has_x = true;
            if ( x_value( copy, it->second, nx ) == ( l > 0 ) )
            {
              sat = true;
              break;
            }
            continue;
          }
          uint64_t id;
          if ( auto it = s_idx.find( v ); it != s_idx.end() )
            id = it->second + 1u;
          else
          {
            id = base + copy * nz + z_idx.at( v );
            has_z = true;
          }
          max_id = std::max( max_id, id );
          nc.push_back( l > 0 ? static_cast<lit>( id ) : -static_cast<lit>( id ) );
        }
        if ( sat )
          continue;
        if ( !has_z && !has_x )
        {
          if ( copy > 0u || !shared_seen.insert( nc ).second )
            continue;
        }
        out.push_back( std::move( nc ) );
      }
    }
  }
  else if ( q.graph().size() > 0u )
  {
    auto const& g = q.graph();
    auto const cone = g.cone();

    /* top-level conjuncts of the root: single-use ANDs are flattened and
       single-use ORs are asserted as plain clauses instead of being defined */
    std::vector<uint32_t> refs( g.size(), 0u );
    for ( auto n : cone )
      for ( auto f : g.at( n ).fanins )
        ++refs[f];
    ++refs[g.root()];
    std::vector<uint8_t> absorbed( g.size(), 0u );
    std::vector<gate_graph::node_id> conjuncts;
    {
      std::vector<gate_graph::node_id> stack{g.root()};
      while ( !stack.empty() )
      {
        auto const n = stack.back();
        stack.pop_back();
        auto const& nd = g.at( n );
        if ( refs[n] == 1u && nd.kind == gate_kind::and_ )
        {
          absorbed[n] = 1u;
          for ( auto it = nd.fanins.rbegin(); it != nd.fanins.rend(); ++it )
            stack.push_back( *it );
          continue;
        }
        if ( refs[n] == 1u && nd.kind == gate_kind::or_ )
          absorbed[n] = 1u;
        conjuncts.push_back( n );
      }
    }

    /* which nodes depend only on S (or on nothing) */
    std::vector<uint8_t> s_only( g.size(), 1u );
    std::vector<uint32_t> shared_index( g.size(), 0u ), inner_index( g.size(), 0u );
    uint32_t n_shared = 0, n_inner = static_cast<uint32_t>( q.Z.size() );
    for ( auto n : cone )
    {
      auto const& nd = g.at( n );
      if ( nd.kind == gate_kind::variable )
      {
        s_only[n] = s_idx.count( nd.data ) ? 1u : 0u;
        continue;
      }
      if ( nd.kind == gate_kind::constant )
        continue;
      for ( auto f : nd.fanins )
        s_only[n] &= s_only[f];
      if ( absorbed[n] )
        continue;
      if ( s_only[n] )
        shared_index[n] = n_shared++;
      else
        inner_index[n] = n_inner++;
    }
    ex.shared_nodes = n_shared;
    uint64_t const shared_base = nS + 1u;
    uint64_t const base = shared_base + n_shared;
    uint64_t const nz = n_inner;

    using E = detail::clause_emitter;
    std::vector<lit> val( g.size(), 0 );
    uint64_t next_id = 0;
    cnf sink;
    std::map<std::vector<lit>, lit> cache;
    E em{sink, [&]() { return static_cast<var>( next_id++ ); }, &cache};

    auto eval_node = [&]( gate_graph::node_id n, uint64_t copy, bool shared_pass ) {
      auto const& nd = g.at( n );
      switch ( nd.kind )
      {
      case gate_kind::constant:
        val[n] = nd.data ? E::lit_true : E::lit_false;
        return;
      case gate_kind::variable:
      {
        auto const v = nd.data;
        if ( auto it = s_idx.find( v ); it != s_idx.end() )
          val[n] = static_cast<lit>( it->second + 1u );
        else if ( auto ix = x_idx.find( v ); ix != x_idx.end() )
          val[n] = x_value( copy, ix->second, nx ) ? E::lit_true : E::lit_false;
        else
        {
          auto const id = base + copy * nz + z_idx.at( v );
          max_id = std::max( max_id, id );
          val[n] = static_cast<lit>( id );
        }
        return;
      }
      default:
        break;
      }
      std::vector<lit> in;
      in.reserve( nd.fanins.size() );
      for ( auto f : nd.fanins )
        in.push_back( val[f] );
      next_id = shared_pass ? shared_base + shared_index[n] : base + copy * nz + inner_index[n];
      auto const before = next_id;
      auto const l = em.emit( nd.kind, in );
      /* the emitter may chain through more than one fresh id for n-ary parity */
      if ( next_id > before + 1u )
        throw std::logic_error( "n-ary parity nodes must be binary for expansion" );
      if ( next_id > before )
        max_id = std::max( max_id, before );
      val[n] = l;
    };

    auto assert_conjunct = [&]( gate_graph::node_id n ) {
      auto const& nd = g.at( n );
      if ( !absorbed[n] )
      {
        em.assert_lit( val[n] );
        return;
      }
      std::vector<lit> c;
      for ( auto f : nd.fanins )
      {
        if ( val[f] == E::lit_true )
          return;
        if ( val[f] != E::lit_false )
          c.push_back( val[f] );
      }
      if ( c.empty() )
        sink.clauses.push_back( {} );
      else
        sink.add_clause( std::move( c ) );
    };

    for ( auto n : cone )
    {
      if ( s_only[n] && !absorbed[n] )
        eval_node( n, 0u, true );
    }
    for ( auto n : conjuncts )
    {
      if ( s_only[n] )
        assert_conjunct( n );
    }
    std::vector<lit> const shared_val = val;
    for ( uint64_t copy = 0; copy < ex.copies; ++copy )
    {
      bool any = false;
      for ( auto n : conjuncts )
        any |= !s_only[n];
      if ( !any )
        break;
      for ( auto n : cone )
      {
        if ( absorbed[n] )
          continue;
        if ( s_only[n] )
        {
          val[n] = shared_val[n];
          continue;
        }
        eval_node( n, copy, false );
      }
      for ( auto n : conjuncts )
      {
        if ( !s_only[n] )
          assert_conjunct( n );
      }
    }
    out = std::move( sink.clauses );
  }

  /* compaction: S keeps ids 1..|S|, everything else is renumbered densely in id order */
  std::vector<uint8_t> used( max_id + 1u, 0u );
  for ( auto const& c : out )
    for ( auto l : c )
      used[var_of( l )] = 1u;
  std::vector<var> remap( max_id + 1u, 0u );
  var next = static_cast<var>( nS );
  for ( uint64_t i = 1; i <= nS; ++i )
    remap[i] = static_cast<var>( i );
  for ( uint64_t i = nS + 1u; i <= max_id; ++i )
  {
    if ( used[i] )
      remap[i] = ++next;
  }
  ex.formula.num_vars = next;
  for ( auto& c : out )
  {
    std::vector<lit> nc;
    nc.reserve( c.size() );
    for ( auto l : c )
      nc.push_back( l > 0 ? static_cast<lit>( remap[l] ) : -static_cast<lit>( remap[-l] ) );
    if ( nc.empty() )
      ex.formula.clauses.push_back( {} );
    else
      ex.formula.add_clause( std::move( nc ) );
  }
  ex.formula.num_vars = std::max<uint32_t>( ex.formula.num_vars, next );
  for ( auto i = 0u; i < q.S.size(); ++i )
    ex.s_vars.push_back( i + 1u );
  return ex;
}

/*! \brief Conjoins the clause "not w" over S (w[i] is the value of S[i]). */
inline qbf2 block( qbf2 q, std::vector<bool> const& w )
{
  if ( w.size() != q.S.size() )
    throw std::invalid_argument( "witness must assign every S variable" );
  if ( q.is_cnf() )
  {
    std::vector<lit> c;
    for ( auto i = 0u; i < w.size(); ++i )
      c.push_back( w[i] ? -static_cast<lit>( q.S[i] ) : static_cast<lit>( q.S[i] ) );
    if ( c.empty() )
      q.clauses().clauses.push_back( {} );
    else
      q.clauses().add_clause( c );
    return q;
  }
  auto& g = q.graph();
  auto const root = g.root();
  std::vector<gate_graph::node_id> lits;
  for ( auto i = 0u; i < w.size(); ++i )
  {
    auto const v = g.variable( q.S[i] );
    lits.push_back( w[i] ? g.make_not( v ) : v );
  }
  g.set_root( g.make_and( root, g.make_or( lits ) ) );
  return q;
}

/*! \brief Clausified matrix and matching inner block for QDIMACS output. */
inline qbf2 clausify( qbf2 const& q )
{
  if ( q.is_cnf() )
    return q;
  auto t = tseitin( q.graph() );
  qbf2 r;
  r.S = q.S;
  r.X = q.X;
  r.Z = q.Z;
  std::set<var> outer( q.S.begin(), q.S.end() );
  outer.insert( q.X.begin(), q.X.end() );
  outer.insert( q.Z.begin(), q.Z.end() );
  std::set<var> seen;
  for ( auto const& c : t.formula.clauses )
  {
    for ( auto l : c )
    {
      auto const v = var_of( l );
      if ( !outer.count( v ) && seen.insert( v ).second )
        r.Z.push_back( v );
    }
  }
  std::sort( r.Z.begin() + static_cast<long>( q.Z.size() ), r.Z.end() );
  r.matrix = std::move( t.formula );
  return r;
}

inline std::string to_dimacs( cnf const& f )
{
  std::ostringstream os;
  os << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
  for ( auto const& c : f.clauses )
  {
    for ( auto l : c )
      os << l << ' ';
    os << "0\n";
  }
  return os.str();
}

/*! \brief QDIMACS text; a gate-graph matrix is clausified first. */
inline std::string to_qdimacs( qbf2 const& q0 )
{
  auto const q = clausify( q0 );
  auto const& f = q.clauses();
  var nv = f.num_vars;
  for ( auto const* blk : {&q.S, &q.X, &q.Z} )
    for ( auto v : *blk )
      nv = std::max( nv, v );
  std::ostringstream os;
  os << "p cnf " << nv << ' ' << f.clauses.size() << '\n';
  auto block_line = [&]( char c, std::vector<var> const& vs ) {
    if ( vs.empty() )
      return;
    os << c;
    for ( auto v : vs )
      os << ' ' << v;
    os << " 0\n";
  };
  block_line( 'e', q.S );
  block_line( 'a', q.X );
  block_line( 'e', q.Z );
  for ( auto const& c : f.clauses )
  {
    for ( auto l : c )
      os << l << ' ';
    os << "0\n";
  }
  return os.str();
}

struct qdimacs
{
  cnf formula;
  std::vector<std::pair<quantifier, std::vector<var>>> blocks;
};

/*! \brief Reads DIMACS or QDIMACS text; prefix lines are collected when present. */
inline qdimacs parse_qdimacs( std::string const& text )
{
  qdimacs r;
  std::istringstream in( text );
  std::string line;
  bool header = false;
  uint64_t declared_clauses = 0;
  std::vector<lit> cur;
  while ( std::getline( in, line ) )
  {
    std::istringstream ls( line );
    std::string tok;
    if ( !( ls >> tok ) || tok == "c" || tok[0] == '%' )
      continue;
    if ( tok == "p" )
    {
      std::string fmt;
      if ( !( ls >> fmt >> r.formula.num_vars >> declared_clauses ) || fmt != "cnf" )
        throw std::invalid_argument( "bad problem line: " + line );
      header = true;
      continue;
    }
    if ( !header )
      throw std::invalid_argument( "clause before problem line" );
    if ( tok == "e" || tok == "a" )
    {
      std::vector<var> vs;
      long v;
      while ( ls >> v && v != 0 )
        vs.push_back( static_cast<var>( v ) );
      r.blocks.emplace_back( tok == "e" ? quantifier::exists : quantifier::forall, std::move( vs ) );
      continue;
    }
    std::istringstream cs( line );
    long v;
    while ( cs >> v )
    {
      if ( v == 0 )
      {
        if ( cur.empty() )
          r.formula.clauses.push_back( {} );
        else
        {
          auto const nv = r.formula.num_vars;
          r.formula.add_clause( cur );
          r.formula.num_vars = std::max( nv, r.formula.num_vars );
        }
        cur.clear();
      }
      else
        cur.push_back( static_cast<lit>( v ) );
    }
    if ( cs.fail() && !cs.eof() )
      throw std::invalid_argument( "bad clause line: " + line );
  }
  if ( !header )
    throw std::invalid_argument( "missing problem line" );
  if ( !cur.empty() )
    throw std::invalid_argument( "unterminated clause" );
  return r;
}

} // namespace exsyn
