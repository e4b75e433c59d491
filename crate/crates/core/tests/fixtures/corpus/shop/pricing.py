from typing import Dict, List, Tuple

from .models import Order, Product

TAX_RATE: float = 0.2
CURRENCIES: Dict[str, str] = {'EUR': '€', 'USD': '$'}


def subtotal(products: List[Product], counts: Dict[str, int]) -> float:
    total: float = 0.0
    for product in products:
        total += product.price * counts.get(product.sku, 0)
    return total


def with_tax(amount: float, rate: float = TAX_RATE) -> float:
    taxed: float = amount * (1 + rate)
    return round(taxed, 2)


def cheapest(products: List[Product]) -> Product:
    best: Product = min(products, key=lambda p: p.price)
    return best


def split_order(order: Order, limit: int) -> Tuple[List[str], List[str]]:
    skus: List[str] = order.skus()
    head: List[str] = skus[:limit]
    tail: List[str] = skus[limit:]
    return head, tail


def is_free(amount: float) -> bool:
    flag: bool = amount == 0
    return flag
